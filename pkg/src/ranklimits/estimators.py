"""Moment-method ranker, exhaustive MAP ranker and the pairwise-swap failure event."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import Permutation, ProbMatrix, disagreement
from .sampler import CountsMatrix, EnsembleMatrix

MAP_MAX_N = 10

# relative tolerance used to decide which permutations tie for the MAP maximum
MAP_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class MomentEstimate:
    m_hat: np.ndarray
    row_scores: np.ndarray
    p_known: bool
    raw: bool = True  # m_hat is never clamped into [0, 1]


@dataclass(frozen=True)
class RankingResult:
    pi_hat: Permutation
    scores: np.ndarray
    tie_count: int


def moment_estimate(ens: EnsembleMatrix, p: float | None = None) -> MomentEstimate:
    """Debiased estimate ens / (2p) + 1/2 and its row means.

    With ``p=None`` the unknown-p form ens / 2 + 1/2 is used; it orders rows
    identically.
    """
    if p is not None and not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    scale = 2.0 * (p if p is not None else 1.0)
    n = ens.values.shape[0]
    m_hat = ens.values / scale + 0.5
    np.fill_diagonal(m_hat, 0.5)
    # computed from exact integer totals so equal totals give bit-equal scores
    totals = ens.totals().sum(axis=1)
    row_scores = (totals / (scale * ens.m) + n / 2.0) / n
    return MomentEstimate(m_hat=m_hat, row_scores=row_scores, p_known=p is not None)


def rank_by_scores(est: MomentEstimate) -> RankingResult:
    s = np.asarray(est.row_scores)
    order = np.argsort(-s, kind="stable")
    sorted_s = s[order]
    ties = int(np.count_nonzero(sorted_s[:-1] == sorted_s[1:]))
    return RankingResult(Permutation(order), s, ties)


def _check_map_inputs(c: CountsMatrix, M: ProbMatrix) -> None:
    if c.n != M.n:
        raise ValueError("counts and matrix sizes differ")
    if M.n > MAP_MAX_N:
        raise ValueError(f"exhaustive MAP is limited to n <= {MAP_MAX_N}, got n = {M.n}")


def _lex_permutations(n: int, chunk: int = 40320):
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def map_log_likelihoods(c: CountsMatrix, M: ProbMatrix):
    """Yield (candidate maps, log-likelihoods) in lexicographic order, chunked.

    L(pi) = sum_{u != v} wins[u, v] * log M[r(u), r(v)] with r = pi^-1.
    """
    _check_map_inputs(c, M)
    n = M.n
    logM = np.log(M.entries)
    W = c.wins.astype(float)
    u, v = np.nonzero(W)
    w = W[u, v]
    for perms in _lex_permutations(n):
        ranks = np.empty_like(perms)
        rows = np.arange(perms.shape[0])[:, None]
        ranks[rows, perms] = np.arange(n)
        if u.size:
            L = (logM[ranks[:, u], ranks[:, v]] * w).sum(axis=1)
        else:
            L = np.zeros(perms.shape[0])
        yield perms, L


def _all_log_likelihoods(c: CountsMatrix, M: ProbMatrix) -> np.ndarray:
    return np.concatenate([L for _, L in map_log_likelihoods(c, M)])


def _maximizers(L: np.ndarray) -> np.ndarray:
    top = L.max()
    return np.flatnonzero(L >= top - MAP_TIE_RTOL * max(1.0, abs(top)))


def nth_permutation(n: int, k: int) -> np.ndarray:
    """k-th permutation of range(n) in lexicographic order."""
    pool = list(range(n))
    out = []
    for i in range(n, 0, -1):
        f = math.factorial(i - 1)
        q, k = divmod(k, f)
        out.append(pool.pop(q))
    return np.array(out, dtype=np.int64)


def map_rank(c: CountsMatrix, M: ProbMatrix) -> RankingResult:
    """Exhaustive maximum-likelihood (uniform-prior MAP) ranking.

    ``M`` is the ordered ground-truth matrix; ``c`` are counts on observed
    labels.  Ties go to the lexicographically smallest permutation and
    ``tie_count`` is the number of maximizers.
    """
    hits = _maximizers(_all_log_likelihoods(c, M))
    best = nth_permutation(M.n, int(hits[0]))
    ranks = np.empty(M.n, dtype=np.int64)
    ranks[best] = np.arange(M.n)
    # per-label score: higher means stronger
    scores = (M.n - 1 - ranks).astype(float)
    return RankingResult(Permutation(best), scores, int(hits.size))


def map_argmax_set(c: CountsMatrix, M: ProbMatrix) -> set[tuple[int, ...]]:
    """All maximizing candidate permutations (same tie tolerance as map_rank)."""
    hits = _maximizers(_all_log_likelihoods(c, M))
    return {tuple(int(x) for x in nth_permutation(M.n, int(k))) for k in hits}


def score_F(c: CountsMatrix, M: ProbMatrix, i: int, j: int) -> float:
    """Score of placing label i at rank j.

    sum over l not in {i, j} of wins[i, l] log M[j, l] + losses[i, l] log(1 - M[j, l]);
    labels and ranks share indices (ground truth taken as the identity).
    """
    n = M.n
    if c.n != n:
        raise ValueError("counts and matrix sizes differ")
    keep = np.ones(n, dtype=bool)
    keep[[i, j]] = False
    Mj = M.entries[j, keep]
    return float(np.sum(c.wins[i, keep] * np.log(Mj) + c.losses[i, keep] * np.log1p(-Mj)))


def relabel_counts(c: CountsMatrix, pi: Permutation) -> CountsMatrix:
    """Counts re-indexed by the ranks that ``pi`` assigns to labels."""
    mp = pi.map
    return CountsMatrix(wins=c.wins[np.ix_(mp, mp)], losses=c.losses[np.ix_(mp, mp)])


def loglik_via_scores(c: CountsMatrix, M: ProbMatrix, pi: Permutation) -> float:
    """Half of sum_r F(r, r) on rank-relabelled counts; equals the MAP objective L(pi).

    Each observed pair contributes once from each endpoint, hence the half.
    """
    cr = relabel_counts(c, pi)
    n = M.n
    total = 0.0
    for r in range(n):
        # F(r, r) excludes only l = r; the diagonal of the counts is zero anyway
        total += score_F(cr, M, r, r)
    return 0.5 * total


@dataclass(frozen=True)
class SwapEvent:
    occurred: bool
    statistic: float


def swap_statistics(c: CountsMatrix, M: ProbMatrix, i1, i2) -> np.ndarray:
    """Vectorised failure statistic for arrays of rank pairs (i1, i2)."""
    i1 = np.atleast_1d(np.asarray(i1, dtype=np.int64))
    i2 = np.atleast_1d(np.asarray(i2, dtype=np.int64))
    if np.any(i1 == i2):
        raise ValueError("i1 and i2 must differ")
    e = M.entries
    logA = np.log(e[i2]) - np.log(e[i1])
    logB = np.log1p(-e[i2]) - np.log1p(-e[i1])
    terms = (c.wins[i1] - c.wins[i2]) * logA + (c.losses[i1] - c.losses[i2]) * logB
    k = np.arange(i1.size)
    terms[k, i1] = 0.0
    terms[k, i2] = 0.0
    return terms.sum(axis=1)


def swap_failure_event(c: CountsMatrix, M: ProbMatrix, i1: int, i2: int) -> SwapEvent:
    """Whether swapping ranks i1 and i2 scores at least as well as the truth."""
    stat = float(swap_statistics(c, M, [i1], [i2])[0])
    return SwapEvent(occurred=stat >= 0, statistic=stat)


def exact_recovery(pi_hat: Permutation, pi_star: Permutation) -> bool:
    return disagreement(pi_hat, pi_star) == 0.0
