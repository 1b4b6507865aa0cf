"""Observed-comparison graph, union-find connectivity and the ensembled ER limit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .parallel import map_ordered
from .sampler import ObservationBatch, derive_seed, observation_mask


class DisjointSet:
    """Union-find over 0..n-1 with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


@dataclass(frozen=True)
class ObservedGraph:
    n: int
    edges: frozenset  # of (i, j) with i < j


def observed_graph(batch: ObservationBatch) -> ObservedGraph:
    seen = np.any(batch.rounds != 0, axis=0)
    i, j = np.nonzero(np.triu(seen, 1))
    return ObservedGraph(batch.n, frozenset(zip(i.tolist(), j.tolist())))


def _connected(n: int, us, vs) -> bool:
    if n <= 1:
        return True
    ds = DisjointSet(n)
    for a, b in zip(us, vs):
        if ds.union(a, b) and ds.components == 1:
            return True
    return ds.components == 1


def is_connected(g: ObservedGraph) -> bool:
    if g.n < 1:
        raise ValueError("graph needs at least one vertex")
    us = [a for a, _ in g.edges]
    vs = [b for _, b in g.edges]
    return _connected(g.n, us, vs)


def mask_graph_edges(seed: int, n: int, m: int, p: float, mask_mode: str = "per-round"):
    """Edges of the ensembled graph from the mask stream alone (outcomes skipped).

    Uses the same mask draws as ``sample_batch`` with the same seed, so the
    edge set equals ``observed_graph(sample_batch(...))``.
    """
    observed = observation_mask(seed, m, n, p, mask_mode).any(axis=0)
    iu = np.triu_indices(n, 1)
    return iu[0][observed], iu[1][observed]


@dataclass(frozen=True)
class ConnectivityResult:
    n: int
    m: int
    c: float
    p: float
    trials: int
    empirical: float
    analytic: float
    std_err: float


def connectivity_p(n: int, m: int, c: float) -> float:
    return (math.log(n) + c) / (m * n)


def connectivity_limit(c: float) -> float:
    return math.exp(-math.exp(-c))


def connectivity_experiment(n: int, m: int, c: float, trials: int, seed: int = 0,
                            threads: int = 1) -> ConnectivityResult:
    p = connectivity_p(n, m, c)
    if not 0 < p <= 1:
        raise ValueError(f"derived p = {p} is outside (0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(t: int) -> bool:
        us, vs = mask_graph_edges(derive_seed(seed, t), n, m, p)
        return _connected(n, us.tolist(), vs.tolist())

    hits = sum(map_ordered(one, range(trials), threads))
    r = hits / trials
    return ConnectivityResult(n, m, c, p, trials, r, connectivity_limit(c), math.sqrt(r * (1 - r) / trials))
