"""One-time persistent homology over sentence embeddings.

Landmarks are chosen by maxmin sampling, the lazy witness complex is built up
to triangles, and the boundary matrix is reduced over Z2 to obtain H0 and H1
barcodes together with the sentences that carry each feature.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .embeddings import EmbeddingMatrix, distance_matrix
from .errors import InvalidFiltration, TooFewSentences

NOISE_FLOOR = 1e-9
DEFAULT_MAX_VALUE = 3.0
MIN_LANDMARKS = 10

Simplex = tuple[int, ...]

_counter_lock = threading.Lock()
_reduce_calls = 0


def reduce_call_count() -> int:
    return _reduce_calls


def reset_reduce_call_count() -> None:
    global _reduce_calls
    with _counter_lock:
        _reduce_calls = 0


@dataclass(frozen=True)
class LandmarkSet:
    indices: tuple[int, ...]
    proportion: float
    selection_seed: int


@dataclass(frozen=True)
class Filtration:
    simplices: tuple[tuple[Simplex, float], ...]
    max_value: float

    def __len__(self) -> int:
        return len(self.simplices)

    def critical_values(self) -> list[float]:
        return sorted({v for _, v in self.simplices})


@dataclass(frozen=True)
class PersistenceFeature:
    dimension: int
    birth: float
    death: float
    members: frozenset[int]

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    def to_dict(self) -> dict:
        return {
            "birth": self.birth,
            "death": None if math.isinf(self.death) else self.death,
            "members": sorted(self.members),
        }


@dataclass(frozen=True)
class PersistenceDiagram:
    dim0: tuple[PersistenceFeature, ...]
    dim1: tuple[PersistenceFeature, ...]
    landmarks: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.dim0 or self.dim1)

    def to_dict(self) -> dict:
        return {
            "landmarks": list(self.landmarks),
            "dim0": [f.to_dict() for f in self.dim0],
            "dim1": [f.to_dict() for f in self.dim1],
        }


def landmark_count(n: int, proportion: float) -> int:
    # tolerance keeps e.g. 0.2 * 50 from rounding up to 11
    return min(n, max(math.ceil(proportion * n - 1e-9), min(n, MIN_LANDMARKS)))


def select_landmarks(emb: EmbeddingMatrix, proportion: float = 0.2, seed: int = 42) -> LandmarkSet:
    """Maxmin landmark sampling starting from the point nearest the centroid."""
    n = emb.n
    if n < 2:
        raise TooFewSentences(f"need at least 2 sentences for topology, got {n}")
    if not 0.0 < proportion <= 1.0:
        raise ValueError("landmark proportion must lie in (0, 1]")
    size = landmark_count(n, proportion)
    dist = distance_matrix(emb.rows)

    # for unit rows, max dot with the centroid == min distance to it
    first = int(np.argmax(emb.rows @ emb.rows.mean(axis=0)))
    chosen = [first]
    cover = dist[first].copy()
    cover[first] = -np.inf
    while len(chosen) < size:
        nxt = int(np.argmax(cover))
        chosen.append(nxt)
        cover = np.minimum(cover, dist[nxt])
        cover[chosen] = -np.inf
    return LandmarkSet(tuple(chosen), proportion, seed)


def _witness_edge_values(dist: np.ndarray, landmarks: list[int], nu: int) -> np.ndarray:
    lm = np.asarray(landmarks)
    if nu == 0:
        # Rips mode: every edge enters at its own length
        return dist[np.ix_(lm, lm)].copy()
    to_lm = dist[:, lm]  # witnesses x landmarks
    m_nu = np.sort(to_lm, axis=1)[:, nu - 1]
    values = np.empty((len(lm), len(lm)))
    for a in range(len(lm)):
        pair_max = np.maximum(to_lm[:, a][:, None], to_lm)
        values[a] = np.clip(pair_max - m_nu[:, None], 0.0, None).min(axis=0)
    return np.minimum(values, values.T)


def filtration_from_distances(
    dist: np.ndarray,
    landmarks,
    nu: int = 1,
    max_value: float = DEFAULT_MAX_VALUE,
) -> Filtration:
    """Lazy witness 2-skeleton over ``landmarks`` with all rows as witnesses.

    ``nu == 0`` yields the Vietoris-Rips filtration of the landmarks.
    """
    if nu not in (0, 1, 2):
        raise ValueError("nu must be 0, 1 or 2")
    if max_value < 0:
        raise ValueError("max_value must be non-negative")
    lm = [int(i) for i in landmarks]
    if nu > len(lm):
        raise ValueError("nu exceeds the number of landmarks")
    edge_vals = _witness_edge_values(np.asarray(dist, dtype=np.float64), lm, nu)

    entries: list[tuple[float, int, Simplex]] = [(0.0, 0, (v,)) for v in lm]
    pos = sorted(range(len(lm)), key=lambda a: lm[a])
    edge_of = {}
    for a, b in combinations(pos, 2):
        val = float(edge_vals[a, b])
        if val <= max_value:
            edge_of[(a, b)] = val
            entries.append((val, 1, (lm[a], lm[b])))
    for a, b, c in combinations(pos, 3):
        try:
            val = max(edge_of[(a, b)], edge_of[(a, c)], edge_of[(b, c)])
        except KeyError:
            continue
        entries.append((val, 2, (lm[a], lm[b], lm[c])))
    entries.sort()
    return Filtration(tuple((s, v) for v, _, s in entries), max_value)


def build_witness_filtration(
    emb: EmbeddingMatrix,
    landmarks: LandmarkSet,
    nu: int = 1,
    max_value: float = DEFAULT_MAX_VALUE,
) -> Filtration:
    return filtration_from_distances(distance_matrix(emb.rows), landmarks.indices, nu, max_value)


def _faces(simplex: Simplex) -> list[Simplex]:
    if len(simplex) == 1:
        return []
    return [simplex[:i] + simplex[i + 1:] for i in range(len(simplex))]


def _boundary_columns(filtration: Filtration) -> list[set[int]]:
    index: dict[Simplex, int] = {}
    columns = []
    prev = -math.inf
    for j, (simplex, value) in enumerate(filtration.simplices):
        if len(simplex) > 3 or list(simplex) != sorted(set(simplex)):
            raise InvalidFiltration(f"bad simplex {simplex}")
        if value < prev:
            raise InvalidFiltration(f"values decrease at position {j}")
        if value > filtration.max_value:
            raise InvalidFiltration(f"{simplex} exceeds the filtration cap")
        prev = value
        col = set()
        for face in _faces(simplex):
            if face not in index:
                raise InvalidFiltration(f"face {face} of {simplex} is missing or appears later")
            col.add(index[face])
        if simplex in index:
            raise InvalidFiltration(f"duplicate simplex {simplex}")
        index[simplex] = j
        columns.append(col)
    return columns


def reduce(filtration: Filtration) -> PersistenceDiagram:
    """Z2 column reduction of the boundary matrix (with clearing)."""
    global _reduce_calls
    with _counter_lock:
        _reduce_calls += 1

    simplices = filtration.simplices
    columns = _boundary_columns(filtration)
    dims = [len(s) - 1 for s, _ in simplices]
    values = [v for _, v in simplices]

    pivot_col: dict[int, int] = {}  # low row -> column
    reduced: dict[int, set[int]] = {}
    cycle_of: dict[int, set[int]] = {}  # edge column -> its zero-reducing combination
    cleared: set[int] = set()

    for dim in (2, 1):
        for j, col in enumerate(columns):
            if dims[j] != dim or j in cleared:
                continue
            col = set(col)
            combo = {j}
            while col:
                low = max(col)
                other = pivot_col.get(low)
                if other is None:
                    break
                col ^= reduced[other]
                if dim == 1:
                    combo ^= cycle_of[other]
            if col:
                low = max(col)
                pivot_col[low] = j
                reduced[j] = col
                if dim == 2:
                    cleared.add(low)
            if dim == 1:
                cycle_of[j] = combo

    # H0 members from an elder-rule union-find run in filtration order
    parent: dict[int, int] = {}
    members: dict[int, set[int]] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    dim0, dim1 = [], []
    for j, (simplex, value) in enumerate(simplices):
        if dims[j] == 0:
            parent[j] = j
            members[j] = {simplex[0]}
        elif dims[j] == 1 and j in reduced:
            ra, rb = find(min(columns[j])), find(max(columns[j]))
            elder, younger = min(ra, rb), max(ra, rb)
            if younger != max(reduced[j]):
                raise AssertionError("pairing disagrees with the elder rule")
            if value - values[younger] >= NOISE_FLOOR:
                dim0.append(PersistenceFeature(0, values[younger], value, frozenset(members[younger])))
            parent[younger] = elder
            members[elder] |= members.pop(younger)

    for root in sorted(members):
        dim0.append(PersistenceFeature(0, values[root], math.inf, frozenset(members[root])))

    def vertex_set(edge_cols) -> frozenset[int]:
        return frozenset(v for e in edge_cols for v in simplices[e][0])

    for j in sorted(reduced):
        if dims[j] != 2:
            continue
        low = max(reduced[j])
        if values[j] - values[low] >= NOISE_FLOOR:
            dim1.append(PersistenceFeature(1, values[low], values[j], vertex_set(reduced[j])))
    for j, combo in sorted(cycle_of.items()):
        if j not in reduced and j not in pivot_col:
            dim1.append(PersistenceFeature(1, values[j], math.inf, vertex_set(combo)))

    landmarks = tuple(s[0] for s, _ in simplices if len(s) == 1)
    return PersistenceDiagram(tuple(dim0), tuple(dim1), landmarks)


def _z2_rank(columns: list[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top not in pivots:
                pivots[top] = col
                rank += 1
                break
            col ^= pivots[top]
    return rank


def boundary_ranks(filtration: Filtration, t: float) -> tuple[int, int, int, int, int]:
    """(V, E, T, rank d1, rank d2) of the subcomplex at scale ``t``."""
    present = [s for s, v in filtration.simplices if v <= t]
    verts = [s for s in present if len(s) == 1]
    edges = [s for s in present if len(s) == 2]
    tris = [s for s in present if len(s) == 3]
    vpos = {s: i for i, s in enumerate(verts)}
    epos = {s: i for i, s in enumerate(edges)}
    d1 = [sum(1 << vpos[f] for f in _faces(e)) for e in edges]
    d2 = [sum(1 << epos[f] for f in _faces(tri)) for tri in tris]
    return len(verts), len(edges), len(tris), _z2_rank(d1), _z2_rank(d2)


def betti_numbers_at(filtration: Filtration, t: float) -> tuple[int, int]:
    """Betti numbers (b0, b1) at scale ``t`` from boundary-matrix ranks."""
    if t < 0:
        raise ValueError("t must be non-negative")
    v, e, _, r1, r2 = boundary_ranks(filtration, t)
    return v - r1, e - r1 - r2
