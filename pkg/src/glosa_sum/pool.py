"""Protected Pool: sentences carried by the most persistent H0/H1 features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import EmptyPool
from .homology import PersistenceDiagram, PersistenceFeature


@dataclass(frozen=True)
class ProtectedPool:
    h0_members: frozenset[int]
    h1_members: frozenset[int]
    k_h0: int
    m_h1: int
    provenance: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    @property
    def union(self) -> frozenset[int]:
        return self.h0_members | self.h1_members

    def __len__(self) -> int:
        return len(self.union)

    def remap(self, mapping) -> "ProtectedPool":
        """Relabel sentence indices, e.g. from segment-local to document-global."""
        return ProtectedPool(
            frozenset(mapping[i] for i in self.h0_members),
            frozenset(mapping[i] for i in self.h1_members),
            self.k_h0,
            self.m_h1,
            MappingProxyType({mapping[i]: ids for i, ids in self.provenance.items()}),
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k_h0,
            "m": self.m_h1,
            "h0": sorted(self.h0_members),
            "h1": sorted(self.h1_members),
            "union": sorted(self.union),
            "provenance": {str(i): list(self.provenance[i]) for i in sorted(self.provenance)},
        }


def _rank_key(feature: PersistenceFeature):
    # infinite bars first, then longest, then earliest birth, then lowest member
    return (
        0 if math.isinf(feature.death) else 1,
        -feature.persistence if not math.isinf(feature.death) else 0.0,
        feature.birth,
        min(feature.members),
    )


def top_features(features, count: int) -> list[tuple[int, PersistenceFeature]]:
    ranked = sorted(enumerate(features), key=lambda pair: _rank_key(pair[1]))
    return ranked[:max(count, 0)]


def build_pool(diagram: PersistenceDiagram, k: int = 3, m: int = 3) -> ProtectedPool:
    if k < 0 or m < 0:
        raise ValueError("k and m must be non-negative")
    provenance: dict[int, list[str]] = {}
    selected = {}
    for label, features, count in (("h0", diagram.dim0, k), ("h1", diagram.dim1, m)):
        chosen = set()
        for idx, feat in top_features(features, count):
            chosen |= feat.members
            for s in sorted(feat.members):
                provenance.setdefault(s, []).append(f"{label}:{idx}")
        selected[label] = frozenset(chosen)
    frozen = MappingProxyType({s: tuple(v) for s, v in sorted(provenance.items())})
    return ProtectedPool(selected["h0"], selected["h1"], k, m, frozen)


def position_distribution(pool: ProtectedPool, n: int, bins=(0.1, 0.8)) -> tuple[float, float, float]:
    """Share of protected sentences in the beginning, middle and end of a document."""
    if not pool.union:
        raise EmptyPool("position distribution of an empty pool is undefined")
    lo, hi = bins
    counts = [0, 0, 0]
    for i in pool.union:
        rel = i / n
        counts[0 if rel < lo else 1 if rel < hi else 2] += 1
    total = sum(counts)
    return tuple(c / total for c in counts)
