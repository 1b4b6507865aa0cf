"""Monte Carlo drivers: phase sweeps, failure-event estimates, adjacent census, CSV.

Every random quantity is keyed by (master seed, point index, trial index)
through ``derive_seed``, so results do not depend on the thread count.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .bounds import ThresholdSet, chernoff_upper_bound, pz_lower_bound, thresholds
from .estimators import (MAP_MAX_N, exact_recovery, map_rank, moment_estimate, rank_by_scores,
                         swap_statistics)
from .model import (ClampWarning, GapStats, LinkFunction, Permutation, ProbMatrix,
                    apply_permutation, build_sst_matrix, gap_stats, uniform_gap_qualities)
from .parallel import map_ordered
from .sampler import (CVAR, PERMUTATION, DesignParams, derive_seed, ensemble_from_counts,
                      sample_counts, stream)

ESTIMATORS = ("moment", "map")

# trials per RNG block in the vectorised samplers; fixed so output is thread-independent
BLOCK = 5000


@dataclass(frozen=True)
class SweepConfig:
    n: int
    m: int
    p: float
    scale_grid: tuple[float, ...]
    trials_per_point: int = 400
    estimators: tuple[str, ...] = ("moment",)
    master_seed: int = 0
    link: LinkFunction = field(default_factory=LinkFunction.logistic)
    mask_mode: str = "per-round"
    fixed_pi: bool = False
    p_known: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scale_grid", tuple(float(s) for s in self.scale_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        DesignParams(self.p, self.m, self.mask_mode, self.master_seed)
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ValueError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if "map" in self.estimators and self.n > MAP_MAX_N:
            raise ValueError(f"map estimator needs n <= {MAP_MAX_N}")
        g = np.asarray(self.scale_grid)
        if g.size == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise ValueError("scale_grid must be non-empty, positive and strictly increasing")


@dataclass(frozen=True)
class SweepPoint:
    scale: float
    gaps: GapStats
    trials: int
    success_rate: dict
    std_err: dict
    thresholds: ThresholdSet

    @property
    def bar_delta(self) -> float:
        return self.gaps.bar_delta

    @property
    def min_pair_sq_gap(self) -> float:
        return self.gaps.min_pair_sq_gap

    CSV_HEADER = ("scale", "bar_delta", "sq_gap_indicator", "min_pair_sq_gap", "estimator", "trials",
                  "success_rate", "std_err", "imposs_sq", "achiev_sq", "moment_bar", "shah_bar")

    def csv_rows(self):
        th = self.thresholds
        for est in sorted(self.success_rate, key=ESTIMATORS.index):
            yield (self.scale, self.gaps.bar_delta, self.gaps.sq_gap_indicator, self.gaps.min_pair_sq_gap,
                   est, self.trials, self.success_rate[est], self.std_err[est],
                   th.impossibility_sq, th.achievability_sq, th.moment_bar, th.shah_lower_bar)


def binomial_se(r: float, trials: int) -> float:
    return math.sqrt(r * (1 - r) / trials)


def truth_matrix(n: int, link: LinkFunction, scale: float) -> ProbMatrix:
    """Ordered matrix for uniform gaps w_i = scale (n - i) / n; clamp warnings silenced."""
    w = uniform_gap_qualities(n, scale)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClampWarning)
        return build_sst_matrix(w, link)


def run_trial(cfg: SweepConfig, scale: float, trial_index: int, point_index: int = 0,
              M: ProbMatrix | None = None) -> dict:
    """Exact-recovery flag per requested estimator for one seeded trial."""
    if M is None:
        M = truth_matrix(cfg.n, cfg.link, scale)
    seed = derive_seed(cfg.master_seed, point_index, trial_index)
    if cfg.fixed_pi:
        pi_star = Permutation.random(cfg.n, stream(cfg.master_seed, PERMUTATION))
    else:
        pi_star = Permutation.random(cfg.n, stream(seed, PERMUTATION))
    Ms = apply_permutation(M, pi_star)
    c = sample_counts(Ms, DesignParams(cfg.p, cfg.m, cfg.mask_mode, seed))
    out = {}
    for est in cfg.estimators:
        if est == "moment":
            ens = ensemble_from_counts(c, cfg.m)
            res = rank_by_scores(moment_estimate(ens, cfg.p if cfg.p_known else None))
        else:
            res = map_rank(c, M)
        out[est] = exact_recovery(res.pi_hat, pi_star)
    return out


def phase_sweep(cfg: SweepConfig, threads: int | None = 1) -> list[SweepPoint]:
    points = []
    for k, scale in enumerate(cfg.scale_grid):
        M = truth_matrix(cfg.n, cfg.link, scale)
        gs = gap_stats(M)
        flags = map_ordered(lambda t: run_trial(cfg, scale, t, k, M), range(cfg.trials_per_point), threads)
        rates, errs = {}, {}
        for est in cfg.estimators:
            r = sum(f[est] for f in flags) / cfg.trials_per_point
            rates[est] = r
            errs[est] = binomial_se(r, cfg.trials_per_point)
        th = thresholds(cfg.n, cfg.m, cfg.p, max(4.0, gs.k0))
        points.append(SweepPoint(scale, gs, cfg.trials_per_point, rates, errs, th))
    return points


# ---------------------------------------------------------------------------
# scale <-> bar_delta for the uniform-gap family


def bar_delta_at(n: int, link: LinkFunction, scale: float) -> float:
    return gap_stats(truth_matrix(n, link, scale)).bar_delta


def scale_for_bar_delta(n: int, link: LinkFunction, target: float,
                        lo: float = 1e-9, hi: float = 1e4) -> float | None:
    """Scale giving bar_delta == target, or None when target exceeds what the family reaches."""
    f = lambda s: bar_delta_at(n, link, s) - target  # noqa: E731
    if f(hi) < 0:
        return None
    if f(lo) > 0:
        return lo
    return math.exp(brentq(lambda ls: f(math.exp(ls)), math.log(lo), math.log(hi), xtol=1e-12, rtol=1e-12))


# ---------------------------------------------------------------------------
# failure event


@dataclass(frozen=True)
class FailureEventResult:
    n: int
    m: int
    p: float
    i1: int
    i2: int
    trials: int
    empirical: float
    std_err: float
    pz_lower: float
    chernoff_upper: float

    CSV_HEADER = ("n", "m", "p", "i1", "i2", "trials", "empirical", "std_err", "pz_lower", "chernoff_upper")

    def csv_rows(self):
        yield (self.n, self.m, self.p, self.i1, self.i2, self.trials, self.empirical, self.std_err,
               self.pz_lower, self.chernoff_upper)


def sample_c_sums(M: ProbMatrix, p: float, m: int, i1: int, i2: int, size: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` copies of sum over rounds, sides and columns of the swap variables."""
    e = M.entries
    keep = np.ones(M.n, dtype=bool)
    keep[[i1, i2]] = False
    a, b = e[i1, keep], e[i2, keep]
    logA = np.log(b) - np.log(a)
    logB = np.log1p(-b) - np.log1p(-a)
    pv = np.stack([np.stack([a * p, (1 - a) * p, np.full_like(a, 1 - p)], -1),
                   np.stack([b * p, (1 - b) * p, np.full_like(b, 1 - p)], -1)])
    # clip tiny negative round-off in the last branch
    pv = np.clip(pv, 0.0, 1.0)
    pv /= pv.sum(-1, keepdims=True)
    draws = rng.multinomial(m, pv, size=(size,) + pv.shape[:-1])
    nA = draws[:, 0, :, 0] - draws[:, 1, :, 0]
    nB = draws[:, 0, :, 1] - draws[:, 1, :, 1]
    return (nA * logA + nB * logB).sum(axis=1)


def failure_event_mc(M: ProbMatrix, p: float, m: int, i1: int, i2: int, trials: int,
                     seed: int = 0, threads: int | None = 1, t: float = 0.25) -> FailureEventResult:
    """Monte Carlo P(E_{i1,i2} >= 0) alongside the PZ and Chernoff bounds."""
    if i1 == i2:
        raise ValueError("i1 and i2 must differ")
    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]

    def one(block):
        b, size = block
        rng = stream(derive_seed(seed, b), CVAR)
        return int(np.count_nonzero(sample_c_sums(M, p, m, i1, i2, size, rng) >= 0))

    hits = sum(map_ordered(one, blocks, threads))
    r = hits / trials
    return FailureEventResult(M.n, m, p, i1, i2, trials, r, binomial_se(r, trials),
                              pz_lower_bound(M, p, m, i1, i2, t), chernoff_upper_bound(M, p, m, i1, i2))


# ---------------------------------------------------------------------------
# adjacent-pair census


@dataclass(frozen=True)
class CensusResult:
    n: int
    m: int
    p: float
    trials: int
    mean_Xn: float
    prob_Xn_positive: float

    CSV_HEADER = ("n", "m", "p", "trials", "mean_Xn", "prob_Xn_positive")

    def csv_rows(self):
        yield (self.n, self.m, self.p, self.trials, self.mean_Xn, self.prob_Xn_positive)


def adjacent_failure_count(M: ProbMatrix, p: float, m: int, seed: int, mask_mode: str = "per-round") -> int:
    """Number of adjacent rank pairs whose swap event fires in one sampled batch."""
    c = sample_counts(M, DesignParams(p, m, mask_mode, seed))
    i = np.arange(M.n - 1)
    stats = swap_statistics(c, M, i, i + 1)
    return int(np.count_nonzero(stats >= 0))


def adjacent_failure_census(M: ProbMatrix, p: float, m: int, trials: int, seed: int = 0,
                            threads: int | None = 1, mask_mode: str = "per-round") -> CensusResult:
    if not M.ordered:
        raise ValueError("census needs the ordered ground-truth matrix")
    xs = map_ordered(lambda t: adjacent_failure_count(M, p, m, derive_seed(seed, t), mask_mode),
                     range(trials), threads)
    xs = np.asarray(xs)
    return CensusResult(M.n, m, p, trials, float(xs.mean()), float(np.mean(xs > 0)))


# ---------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def format_csv(points: Sequence, header: Sequence[str] | None = None) -> str:
    if header is None:
        header = points[0].CSV_HEADER if points else SweepPoint.CSV_HEADER
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for pt in points:
        for row in pt.csv_rows():
            w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_csv(points: Sequence, destination, header: Sequence[str] | None = None) -> None:
    """Write header plus rows; ``destination`` is a path, ``-`` for stdout, or a text stream."""
    text = format_csv(points, header)
    if destination == "-" or destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(Path(destination), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
