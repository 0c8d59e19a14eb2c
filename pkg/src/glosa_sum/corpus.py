"""Document ingestion, rule-based sentence segmentation and artifact output."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import DocumentIOError, EmptyDocument, MalformedRecord, RefusedEmptySummary

ABBREVIATIONS = (
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Fig.", "Eq.", "et al.", "e.g.",
    "i.e.", "vs.", "No.", "U.S.", "pp.",
)

# terminal punctuation, optional closing quotes/brackets, then whitespace
_BOUNDARY = re.compile(r"[.!?]+[\"')\]’”]*(\s+)")
_OPENERS = "\"'“‘("
_MIN_SENTENCE_CHARS = 2


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    segment_markers: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise EmptyDocument(f"document {self.id!r} has no text")
        if self.segment_markers is not None:
            markers = tuple(self.segment_markers)
            if any(m < 0 or m > len(self.text) for m in markers):
                raise ValueError("segment markers must lie within the text")
            if any(b <= a for a, b in zip(markers, markers[1:])):
                raise ValueError("segment markers must be strictly increasing")
            object.__setattr__(self, "segment_markers", markers)


@dataclass(frozen=True)
class SentenceRecord:
    index: int
    text: str
    char_span: tuple[int, int]


def _ends_with_abbreviation(head: str) -> bool:
    for abbr in ABBREVIATIONS:
        if head.endswith(abbr):
            start = len(head) - len(abbr)
            if start == 0 or not head[start - 1].isalnum():
                return True
    # single-letter initial, e.g. "J. Smith"
    if len(head) >= 2 and head[-1] == "." and head[-2].isalpha() and head[-2].isupper():
        return len(head) == 2 or not head[-3].isalnum()
    return False


def _raw_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        nxt = m.end()
        if nxt >= len(text):
            break
        ch = text[nxt]
        if not (ch.isupper() or ch.isdigit() or ch in _OPENERS):
            continue
        punct_end = m.start(1)
        head = text[start:punct_end].rstrip("\"')]’”")
        if _ends_with_abbreviation(head):
            continue
        spans.append((start, punct_end))
        start = nxt
    spans.append((start, len(text)))
    return spans


def _trim(text: str, span: tuple[int, int]) -> tuple[int, int]:
    s, e = span
    while s < e and text[s].isspace():
        s += 1
    while e > s and text[e - 1].isspace():
        e -= 1
    return s, e


def segment_sentences(doc: Document) -> list[SentenceRecord]:
    """Split ``doc.text`` into sentences.

    Boundaries are ``.``, ``!`` or ``?`` followed by whitespace and then an
    uppercase letter, digit or opening quote. Known abbreviations and
    single-letter initials never end a sentence. Fragments shorter than two
    characters are folded into their neighbour.
    """
    text = doc.text
    if not text.strip():
        raise EmptyDocument(f"document {doc.id!r} has no text")
    spans = [_trim(text, sp) for sp in _raw_spans(text)]
    spans = [sp for sp in spans if sp[1] > sp[0]]

    merged: list[tuple[int, int]] = []
    pending_start = None
    for s, e in spans:
        if e - s < _MIN_SENTENCE_CHARS:
            if merged:
                merged[-1] = (merged[-1][0], e)
            elif pending_start is None:
                pending_start = s
            continue
        if pending_start is not None:
            s, pending_start = pending_start, None
        merged.append((s, e))
    if pending_start is not None:
        # the whole document is a single tiny fragment
        merged.append(_trim(text, (pending_start, len(text))))

    return [
        SentenceRecord(index=i, text=text[s:e], char_span=(s, e))
        for i, (s, e) in enumerate(merged)
    ]


def _read_utf8(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DocumentIOError(f"cannot read {path}: {exc}") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DocumentIOError(f"{path} is not valid UTF-8 (byte {exc.start})") from exc


def load_document(path, format: str = "plain_text") -> list[Document]:
    path = Path(path)
    raw = _read_utf8(path)
    if not raw.strip():
        raise DocumentIOError(f"{path} is empty")

    if format == "plain_text":
        return [Document(id=path.stem, text=raw)]
    if format != "jsonl":
        raise ValueError(f"unknown document format {format!r}")

    docs = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise MalformedRecord(lineno, "expected a JSON object")
        for key in ("id", "text"):
            if not isinstance(obj.get(key), str):
                raise MalformedRecord(lineno, f"missing or non-string field {key!r}")
        segments = obj.get("segments")
        if segments is not None and (
            not isinstance(segments, list) or not all(isinstance(s, int) for s in segments)
        ):
            raise MalformedRecord(lineno, "'segments' must be a list of integers")
        try:
            docs.append(Document(obj["id"], obj["text"], tuple(segments) if segments else None))
        except (EmptyDocument, ValueError) as exc:
            raise MalformedRecord(lineno, str(exc)) from exc
    return docs


def write_summary(summary, path, format: str = "json") -> None:
    """Write a compressed document as a JSON artifact or as plain text."""
    if not summary.retained_indices:
        raise RefusedEmptySummary(f"summary for {summary.document_id!r} retains nothing")
    if format == "json":
        payload = json.dumps(summary.to_dict(), indent=2, ensure_ascii=False) + "\n"
    elif format == "plain_text":
        payload = "\n".join(summary.sentences) + "\n"
    else:
        raise ValueError(f"unknown summary format {format!r}")
    try:
        Path(path).write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise DocumentIOError(f"cannot write {path}: {exc}") from exc


def read_summary_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
