"""Independent reference computations used by the test-suite.

Nothing here imports the code paths it checks: the persistence oracle works
from the raw simplex list with its own Z2 linear algebra, shortest paths come
from Floyd-Warshall, and neighbourhoods from a full sort.
"""

import itertools
import math
from collections import Counter

import numpy as np


# --- Z2 linear algebra on int bitsets ------------------------------------------

def _eliminate(vectors):
    """Return a reduced basis (dict top-bit -> vector) of the span."""
    basis = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return basis


def rank(vectors):
    return len(_eliminate(vectors))


def kernel(columns):
    """Basis of {x : sum x_i columns_i = 0}, each x as a bitset over column ids."""
    basis = {}
    out = []
    for i, col in enumerate(columns):
        combo = 1 << i
        while col:
            top = col.bit_length() - 1
            if top not in basis:
                basis[top] = (col, combo)
                break
            bcol, bcombo = basis[top]
            col ^= bcol
            combo ^= bcombo
        if not col:
            out.append(combo)
    return out


# --- persistence by persistent Betti numbers ----------------------------------------

def _faces(s):
    return [s[:i] + s[i + 1:] for i in range(len(s))]


class PersistentBetti:
    def __init__(self, simplices):
        self.simplices = list(simplices)
        self.values = sorted({v for _, v in self.simplices})
        by_dim = {0: [], 1: [], 2: []}
        for s, v in self.simplices:
            by_dim[len(s) - 1].append((s, v))
        self.verts, self.edges, self.tris = by_dim[0], by_dim[1], by_dim[2]
        self.vid = {s: i for i, (s, _) in enumerate(self.verts)}
        self.eid = {s: i for i, (s, _) in enumerate(self.edges)}

    def _d1(self, t):
        return [
            (i, sum(1 << self.vid[f] for f in _faces(s)))
            for i, (s, v) in enumerate(self.edges) if v <= t
        ]

    def _d2(self, t):
        return [sum(1 << self.eid[f] for f in _faces(s)) for s, v in self.tris if v <= t]

    def beta(self, k, s, t):
        """dim of the image of H_k(K_s) in H_k(K_t), s <= t."""
        if k == 0:
            z = [1 << self.vid[x] for x, v in self.verts if v <= s]
            b = [col for _, col in self._d1(t)]
        else:
            d1s = self._d1(s)
            ids = [i for i, _ in d1s]
            z = []
            for combo in kernel([col for _, col in d1s]):
                vec = 0
                for pos, eid in enumerate(ids):
                    if combo >> pos & 1:
                        vec |= 1 << eid
                z.append(vec)
            b = self._d2(t)
        return len(z) - (len(z) + rank(b) - rank(z + b))

    def pairs(self, k):
        vals = self.values
        m = len(vals)

        def B(i, j):
            if i < 0:
                return 0
            return self.beta(k, vals[i], vals[j])

        out = Counter()
        for i in range(m):
            for j in range(i + 1, m):
                mu = B(i, j - 1) - B(i, j) - B(i - 1, j - 1) + B(i - 1, j)
                if mu:
                    out[(k, vals[i], vals[j])] += mu
            mu = B(i, m - 1) - B(i - 1, m - 1)
            if mu:
                out[(k, vals[i], math.inf)] += mu
        return out


def persistence_pairs(simplices):
    pb = PersistentBetti(simplices)
    return pb.pairs(0) + pb.pairs(1)


# --- complexes ----------------------------------------------------------------

def rips_simplices(dist, max_value=math.inf):
    n = len(dist)
    out = [((i,), 0.0) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if dist[i][j] <= max_value:
            out.append(((i, j), float(dist[i][j])))
    for a, b, c in itertools.combinations(range(n), 3):
        v = max(dist[a][b], dist[a][c], dist[b][c])
        if v <= max_value:
            out.append(((a, b, c), float(v)))
    return out


# --- graphs -------------------------------------------------------------------

def floyd_warshall(n, edges):
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, w in edges:
        d[i, j] = min(d[i, j], w)
        d[j, i] = min(d[j, i], w)
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def brute_knn(dist, i, k):
    others = sorted((dist[i][j], j) for j in range(len(dist)) if j != i)
    return {j for _, j in others[:k]}


def unit_square_embedding():
    """Four unit vectors whose cosine distances form a unit square (sides 1, diagonals sqrt 2)."""
    q = math.sqrt((2 - math.sqrt(2)) / 2)
    p = math.sqrt(math.sqrt(2) / 2)
    return np.array([
        [p, 0.0, q, 0.0],
        [0.0, p, 0.0, q],
        [-p, 0.0, q, 0.0],
        [0.0, -p, 0.0, q],
    ])
