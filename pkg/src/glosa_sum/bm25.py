"""Okapi BM25 over the sentences of a single document."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on anything that is not a letter or digit."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75


class BM25:
    def __init__(self, corpus: list[list[str]], params: BM25Params = BM25Params()):
        self.params = params
        self.tf = [Counter(doc) for doc in corpus]
        self.doc_len = [len(doc) for doc in corpus]
        self.n_docs = len(corpus)
        self.avgdl = sum(self.doc_len) / self.n_docs if self.n_docs else 0.0
        df = Counter(term for doc in corpus for term in set(doc))
        self.idf = {
            term: math.log((self.n_docs - count + 0.5) / (count + 0.5) + 1.0)
            for term, count in df.items()
        }

    def score(self, query: list[str], i: int) -> float:
        k1, b = self.params.k1, self.params.b
        tf = self.tf[i]
        norm = k1 * (1.0 - b + b * self.doc_len[i] / self.avgdl) if self.avgdl else k1
        total = 0.0
        for term in query:
            f = tf.get(term, 0)
            if f:
                total += self.idf[term] * f * (k1 + 1.0) / (f + norm)
        return total

    def scores(self, query: list[str]) -> list[float]:
        return [self.score(query, i) for i in range(self.n_docs)]


def normalized_scores(sentences: list[str], query: str, params: BM25Params = BM25Params()) -> list[float]:
    """Raw BM25 per sentence, min-max scaled to [0, 1] within the document."""
    raw = BM25([tokenize(s) for s in sentences], params).scores(tokenize(query))
    lo, hi = min(raw), max(raw)
    if hi - lo <= 0.0:
        return [0.0] * len(raw)
    return [(r - lo) / (hi - lo) for r in raw]
