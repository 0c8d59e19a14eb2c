import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from glosa_sum.corpus import SentenceRecord  # noqa: E402
from glosa_sum.embeddings import EmbeddingMatrix, normalize_rows  # noqa: E402
from glosa_sum.graph import SemanticGraph  # noqa: E402


def make_embedding(rows) -> EmbeddingMatrix:
    return EmbeddingMatrix(normalize_rows(rows), source="cache", model_id="test")


def make_sentences(n, texts=None):
    texts = texts or [f"sentence number {i} about topic {i % 3}." for i in range(n)]
    out, pos = [], 0
    for i, t in enumerate(texts):
        out.append(SentenceRecord(i, t, (pos, pos + len(t))))
        pos += len(t) + 1
    return out


def graph_from_edges(n, edges):
    adj = {i: [] for i in range(n)}
    for i, j, w in edges:
        adj[i].append((j, w))
        adj[j].append((i, w))
    return SemanticGraph(n, {i: tuple(sorted(v)) for i, v in adj.items()}, 0, 0.5, 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# --- acceptance report ---------------------------------------------------------

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
