"""ROUGE-1/2/L without stemming or stopword removal."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .bm25 import tokenize
from .errors import EmptyAfterTokenization, InputError

VARIANTS = ("rouge1", "rouge2", "rougeL")
MAX_TOKENS = 20_000


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    variant: str

    def to_dict(self) -> dict:
        return {"p": self.precision, "r": self.recall, "f1": self.f1}


def _score(overlap: int, n_cand: int, n_ref: int, variant: str) -> RougeScore:
    p = overlap / n_cand if n_cand else 0.0
    r = overlap / n_ref if n_ref else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(p, r, f1, variant)


def _tokens(text: str, which: str) -> list[str]:
    toks = tokenize(text)
    if not toks:
        raise EmptyAfterTokenization(f"{which} has no tokens")
    if len(toks) > MAX_TOKENS:
        raise InputError(f"{which} has {len(toks)} tokens; the limit is {MAX_TOKENS}")
    return toks


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int = 1) -> RougeScore:
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    cand = _ngrams(_tokens(candidate, "candidate"), n)
    ref = _ngrams(_tokens(reference, "reference"), n)
    overlap = sum((cand & ref).values())
    return _score(overlap, sum(cand.values()), sum(ref.values()), f"rouge{n}")


def lcs_length(a: list[str], b: list[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    cand = _tokens(candidate, "candidate")
    ref = _tokens(reference, "reference")
    return _score(lcs_length(cand, ref), len(cand), len(ref), "rougeL")


def score_pair(candidate: str, reference: str, variants=VARIANTS) -> dict[str, RougeScore]:
    out = {}
    for v in variants:
        if v == "rougeL":
            out[v] = rouge_l(candidate, reference)
        else:
            out[v] = rouge_n(candidate, reference, int(v[-1]))
    return out


def evaluate_corpus(pairs, variants=VARIANTS, ids=None) -> dict:
    """Per-pair and mean precision/recall/F1 for each requested variant."""
    pairs = list(pairs)
    if not pairs:
        raise InputError("evaluate_corpus needs at least one pair")
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown ROUGE variant {v!r}")
    per_pair = []
    for k, (cand, ref) in enumerate(pairs):
        try:
            scores = score_pair(cand, ref, variants)
        except InputError as exc:
            raise type(exc)(f"pair {k}: {exc}") from exc
        row = {"pair": k, **{v: s.to_dict() for v, s in scores.items()}}
        if ids is not None:
            row["id"] = ids[k]
        per_pair.append(row)
    means = {
        v: {key: sum(row[v][key] for row in per_pair) / len(per_pair) for key in ("p", "r", "f1")}
        for v in variants
    }
    return {"per_pair": per_pair, "means": means}

