"""Random-design observation batches, ensembles and win/loss counts.

Randomness derivation (version 1): every draw comes from a PCG64 stream
seeded by ``SeedSequence(seed, spawn_key=(kind,))``.  Within a stream the
uniforms are laid out as an ``(m, n(n-1)/2)`` array, rounds first and
upper-triangle pairs in row-major order, so each draw is a fixed function
of (seed, round, pair, kind).  The ``fixed`` mask mode uses round 0 only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ProbMatrix

DERIVATION_VERSION = 1

# stream kinds
MASK = 0
OUTCOME = 1
PERMUTATION = 2
CVAR = 3

MASK_MODES = ("per-round", "fixed")


def stream(seed: int, kind: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(kind,))))


def derive_seed(master_seed: int, *key: int) -> int:
    """64-bit child seed for (master_seed, *key)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class DesignParams:
    p: float
    m: int
    mask_mode: str = "per-round"
    seed: int = 0
    allow_zero_p: bool = False  # test hook: p = 0 gives an all-zero batch

    def __post_init__(self):
        lo_ok = self.p >= 0 if self.allow_zero_p else self.p > 0
        if not (lo_ok and self.p <= 1):
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.mask_mode not in MASK_MODES:
            raise ValueError(f"mask_mode must be one of {MASK_MODES}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ObservationBatch:
    """``rounds[k, i, j]`` is +1 if i beat j in round k, -1 if it lost, 0 if unobserved."""

    rounds: np.ndarray
    design: DesignParams

    @property
    def n(self) -> int:
        return self.rounds.shape[1]

    @property
    def m(self) -> int:
        return self.rounds.shape[0]

    def validate(self) -> None:
        r = self.rounds
        if r.ndim != 3 or r.shape[1] != r.shape[2] or r.shape[0] != self.design.m:
            raise ValueError("rounds must have shape (m, n, n)")
        if not np.all(np.isin(r, (-1, 0, 1))):
            raise ValueError("entries must be in {-1, 0, +1}")
        if not np.array_equal(r, -np.transpose(r, (0, 2, 1))):
            raise ValueError("rounds must be antisymmetric")
        if self.design.mask_mode == "fixed":
            nz = r != 0
            if not np.all(nz == nz[0]):
                raise ValueError("fixed mask mode but the zero pattern varies across rounds")


@dataclass(frozen=True)
class EnsembleMatrix:
    values: np.ndarray
    m: int

    def totals(self) -> np.ndarray:
        """m * values as exact integers."""
        return np.rint(self.values * self.m).astype(np.int64)


@dataclass(frozen=True)
class CountsMatrix:
    wins: np.ndarray
    losses: np.ndarray

    @property
    def n(self) -> int:
        return self.wins.shape[0]


def observation_mask(seed: int, m: int, n: int, p: float, mask_mode: str = "per-round") -> np.ndarray:
    """Boolean (m, n_pairs) array of observed upper-triangle pairs."""
    n_pairs = n * (n - 1) // 2
    rows = m if mask_mode == "per-round" else 1
    u = stream(seed, MASK).random((rows, n_pairs))
    mask = u < p
    if rows != m:
        mask = np.broadcast_to(mask, (m, n_pairs))
    return mask


def _upper_draws(M: ProbMatrix, d: DesignParams):
    n = M.n
    iu = np.triu_indices(n, 1)
    mask = observation_mask(d.seed, d.m, n, d.p, d.mask_mode)
    win = stream(d.seed, OUTCOME).random((d.m, iu[0].size)) < M.entries[iu]
    return iu, mask, win


def sample_batch(M_shuffled: ProbMatrix, d: DesignParams) -> ObservationBatch:
    n = M_shuffled.n
    iu, mask, win = _upper_draws(M_shuffled, d)
    upper = np.where(mask, np.where(win, 1, -1), 0).astype(np.int8)
    rounds = np.zeros((d.m, n, n), dtype=np.int8)
    rounds[:, iu[0], iu[1]] = upper
    rounds[:, iu[1], iu[0]] = -upper
    return ObservationBatch(rounds, d)


def ensemble(batch: ObservationBatch) -> EnsembleMatrix:
    return EnsembleMatrix(batch.rounds.mean(axis=0, dtype=float), batch.m)


def counts(batch: ObservationBatch) -> CountsMatrix:
    r = batch.rounds
    return CountsMatrix(
        wins=np.count_nonzero(r == 1, axis=0).astype(np.int64),
        losses=np.count_nonzero(r == -1, axis=0).astype(np.int64),
    )


def sample_counts(M_shuffled: ProbMatrix, d: DesignParams) -> CountsMatrix:
    """Same draws as ``sample_batch`` reduced straight to counts (no (m, n, n) array)."""
    n = M_shuffled.n
    iu, mask, win = _upper_draws(M_shuffled, d)
    w_up = np.count_nonzero(mask & win, axis=0)
    l_up = np.count_nonzero(mask & ~win, axis=0)
    wins = np.zeros((n, n), dtype=np.int64)
    wins[iu] = w_up
    wins.T[iu] = l_up
    return CountsMatrix(wins=wins, losses=wins.T.copy())


def ensemble_from_counts(c: CountsMatrix, m: int) -> EnsembleMatrix:
    return EnsembleMatrix((c.wins - c.losses) / m, m)


def dump_observations(batch: ObservationBatch, path) -> None:
    """Debug dump: one ``round i j value`` line per nonzero entry."""
    k, i, j = np.nonzero(batch.rounds)
    v = batch.rounds[k, i, j]
    lines = [f"{a} {b} {c} {int(x)}" for a, b, c, x in zip(k, i, j, v)]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
