"""Mutual k-NN sentence graph with hybrid semantic/positional edge weights."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .embeddings import EmbeddingMatrix, distance_matrix
from .errors import NodeAbsent

K_MIN, K_MAX = 5, 20

Adjacency = Mapping[int, tuple[tuple[int, float], ...]]


def adaptive_k(n: int, k_min: int = K_MIN, k_max: int = K_MAX) -> int:
    """Neighbourhood size growing as ceil(2 ln n), clamped to [k_min, k_max]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= k_min + 1:
        return n - 1
    k = math.ceil(2.0 * math.log(max(n, 2)))
    return max(k_min, min(k, k_max, n - 1))


def edge_weight(d_sem: float, gap: int, alpha: float, tau: float) -> float:
    return alpha * d_sem + (1.0 - alpha) * math.exp(-abs(gap) / tau)


def exact_knn(dist: np.ndarray, k: int) -> list[list[int]]:
    """k nearest neighbours per row, ties broken by lower index."""
    n = dist.shape[0]
    order = np.arange(n)
    out = []
    for i in range(n):
        ranked = np.lexsort((order, dist[i]))
        out.append([int(j) for j in ranked if j != i][:k])
    return out


@dataclass(frozen=True)
class SemanticGraph:
    n: int
    adjacency: Adjacency
    k_used: int
    alpha: float
    tau: float

    @property
    def nodes(self) -> list[int]:
        return sorted(self.adjacency)

    def __contains__(self, i) -> bool:
        return i in self.adjacency

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        try:
            return self.adjacency[i]
        except KeyError:
            raise NodeAbsent(i) from None

    def edges(self) -> list[tuple[int, int, float]]:
        return [(i, j, w) for i in self.nodes for j, w in self.adjacency[i] if i < j]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "tau": self.tau,
            "k_used": self.k_used,
            "edges": [[i, j, w] for i, j, w in self.edges()],
        }


def build_graph(
    emb: EmbeddingMatrix,
    alpha: float = 0.5,
    tau: float = 10.0,
    k: int | None = None,
    knn: Callable[[np.ndarray, int], list[list[int]]] = exact_knn,
) -> SemanticGraph:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = emb.n
    k = adaptive_k(n) if k is None else k
    dist = distance_matrix(emb.rows)
    neigh = [set(row) for row in knn(dist, k)]

    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    for i in range(n):
        for j in neigh[i]:
            if i < j and i in neigh[j]:
                w = edge_weight(float(dist[i, j]), j - i, alpha, tau)
                adj[i].append((j, w))
                adj[j].append((i, w))
    frozen = {i: tuple(sorted(v)) for i, v in adj.items()}
    return SemanticGraph(n=n, adjacency=frozen, k_used=k, alpha=alpha, tau=tau)


def remove_node(g: SemanticGraph, i: int) -> SemanticGraph:
    """Return a new graph without node ``i`` and its incident edges."""
    if i not in g.adjacency:
        raise NodeAbsent(i)
    adj = dict(g.adjacency)
    for j, _ in adj.pop(i):
        adj[j] = tuple(e for e in adj[j] if e[0] != i)
    return SemanticGraph(n=g.n, adjacency=adj, k_used=g.k_used, alpha=g.alpha, tau=g.tau)


def shortest_path_lengths(g: SemanticGraph, source: int) -> dict[int, float]:
    """Dijkstra from ``source``; unreachable nodes are absent from the result."""
    if source not in g.adjacency:
        raise NodeAbsent(source)
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in g.adjacency[u]:
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist
