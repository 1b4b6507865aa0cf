"""Closed-form bound machinery.

f_t-divergences between Bernoulli laws, moment generating functions of the
three-branch swap variables, the Paley-Zygmund lower bound and Chernoff
upper bound on the swap failure probability, the moment-method tail bound
and the threshold formulas.  Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ProbMatrix, k0_of, pair_sq_gaps


class BoundInapplicable(ValueError):
    """The requested bound has a non-positive denominator for these inputs."""


@dataclass(frozen=True)
class BernoulliPair:
    """m1 = M[i1, l], m2 = M[i2, l] and the observation probability p."""

    m1: float
    m2: float
    p: float = 1.0

    def __post_init__(self):
        if not (0 < self.m1 < 1 and 0 < self.m2 < 1):
            raise ValueError("Bernoulli parameters must be strictly inside (0, 1)")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")


def _ft(m1, m2, t):
    # D_{f_t}(Bern(m1) || Bern(m2)) = (m2/m1)^t m1 + ((1-m2)/(1-m1))^t (1-m1)
    return (m2 / m1) ** t * m1 + ((1 - m2) / (1 - m1)) ** t * (1 - m1)


def f_t_divergence(pair: BernoulliPair, t: float, direction: str = "1->2") -> float:
    if direction == "1->2":
        return float(_ft(pair.m1, pair.m2, t))
    if direction == "2->1":
        return float(_ft(pair.m2, pair.m1, t))
    raise ValueError("direction must be '1->2' or '2->1'")


def mgf_c(pair: BernoulliPair, t: float, which: str = "i1") -> float:
    """E exp(t C) for the i1-side (X||Y) or i2-side (Y||X) swap variable."""
    direction = {"i1": "1->2", "i2": "2->1"}.get(which)
    if direction is None:
        raise ValueError("which must be 'i1' or 'i2'")
    return 1 - pair.p + pair.p * f_t_divergence(pair, t, direction)


def expected_c_sum(pair: BernoulliPair) -> float:
    """E[C_i1 + C_i2] = -p (m2 - m1) log(m2 (1 - m1) / (m1 (1 - m2))), never positive."""
    m1, m2, p = pair.m1, pair.m2, pair.p
    return -p * (m2 - m1) * math.log(m2 * (1 - m1) / (m1 * (1 - m2)))


def centered_mgf_sum(pair: BernoulliPair, t: float) -> float:
    m1, m2, p = pair.m1, pair.m2, pair.p
    ratio = m2 * (1 - m1) / (m1 * (1 - m2))
    return ratio ** (t * p * (m2 - m1)) * mgf_c(pair, t, "i1") * mgf_c(pair, t, "i2")


def log_psi(M: ProbMatrix, p: float, m: int, i1: int, i2: int, t: float) -> float:
    """log E exp(t E_{i1,i2}): m times the log of the per-column product over both sides."""
    e = M.entries
    keep = np.ones(M.n, dtype=bool)
    keep[[i1, i2]] = False
    a, b = e[i1, keep], e[i2, keep]
    log_side1 = np.log1p(-p + p * _ft(a, b, t))
    log_side2 = np.log1p(-p + p * _ft(b, a, t))
    return m * float(np.sum(log_side1 + log_side2))


def pz_lower_bound(M: ProbMatrix, p: float, m: int, i1: int, i2: int, t: float = 0.25) -> float:
    """(Psi(t) - 1)^2 / Psi(2t), clipped to [0, 1].

    Paley-Zygmund only licenses this when Psi(t) > 1, i.e. t > 1; for
    t in (0, 1) Psi(t) <= 1 and the value is a heuristic (see
    ``pz_applicable``).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if i1 == i2:
        raise ValueError("i1 and i2 must differ")
    lt = log_psi(M, p, m, i1, i2, t)
    l2t = log_psi(M, p, m, i1, i2, 2 * t)
    num = math.expm1(lt) ** 2
    if num == 0.0:
        return 0.0
    log_ratio = math.log(num) - l2t
    return 1.0 if log_ratio >= 0 else math.exp(log_ratio)


def pz_applicable(M: ProbMatrix, p: float, m: int, i1: int, i2: int, t: float) -> bool:
    """True when Psi(t) > 1, so theta = 1/Psi(t) lies in (0, 1)."""
    return log_psi(M, p, m, i1, i2, t) > 0.0


def chernoff_upper_bound(M: ProbMatrix, p: float, m: int, i1: int, i2: int) -> float:
    s = float(pair_sq_gaps(M)[i1, i2])
    return math.exp(-8 * m * p * s / k0_of(M))


def union_bound_failure(M: ProbMatrix, p: float, m: int) -> float:
    n = M.n
    S = pair_sq_gaps(M)
    min_gap = float(S[np.triu_indices(n, 1)].min())
    return min(1.0, n * (n - 1) / 2 * math.exp(-8 * m * p * min_gap / k0_of(M)))


def kappa(M: ProbMatrix, m: int, n: int, i: int, j: int) -> float:
    e = M.entries
    return float(np.sum((2 * e[i] - 1) ** 2 - (2 * e[j] - 1) ** 2) / (8 * m * n * n))


def popularity_gap(M: ProbMatrix, i: int, j: int) -> float:
    """G_ij = (1/n) sum_k (M[i, k] - M[j, k])."""
    e = M.entries
    return float(np.sum(e[i] - e[j]) / M.n)


def moment_tail_bound(M: ProbMatrix, p: float, m: int, i: int, j: int) -> float:
    """exp(-G^2 / (4 kappa + 1/(m n p))) bounding P(G_hat_ij <= 0)."""
    n = M.n
    G = popularity_gap(M, i, j)
    if G < 0:
        raise ValueError(f"row {i} is not stronger than row {j} (G = {G})")
    den = 4 * kappa(M, m, n, i, j) + 1 / (m * n * p)
    if den <= 0:
        raise BoundInapplicable(f"4*kappa + 1/(mnp) = {den} <= 0")
    return float(min(1.0, math.exp(-G * G / den)))


@dataclass(frozen=True)
class ThresholdSet:
    impossibility_sq: float
    achievability_sq: float
    impossibility_bar: float
    achievability_bar: float
    moment_bar: float
    shah_lower_bar: float


def thresholds(n: int, m: int, p: float, k0: float) -> ThresholdSet:
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if not k0 >= 4:
        raise ValueError("k0 must be >= 4")
    ln = math.log(n)
    mp = m * p
    return ThresholdSet(
        impossibility_sq=4 * ln / (k0 * mp),
        achievability_sq=k0 * ln / (4 * mp),
        impossibility_bar=(2 / n) * math.sqrt(ln / (k0 * mp)),
        achievability_bar=math.sqrt(k0 * ln / (4 * n * mp)),
        moment_bar=math.sqrt(ln / (mp * n)),
        shah_lower_bar=math.sqrt(ln / (mp * n)) / 70,
    )
