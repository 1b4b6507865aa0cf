"""SST probability matrices, permutations and gap statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_CLAMP_EPS = 1e-6


class ClampWarning(UserWarning):
    """Link output had to be clamped into [eps, 1 - eps]."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# quality vectors and link functions


def quality_vector(w: Sequence[float]) -> np.ndarray:
    """Validate a strictly decreasing quality vector and return it as an array."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("quality vector needs n >= 2 entries")
    if not np.all(np.isfinite(w)):
        raise ValueError("quality vector has non-finite entries")
    if not np.all(np.diff(w) < 0):
        raise ValueError("quality vector must be strictly decreasing")
    return w


def uniform_gap_qualities(n: int, scale: float) -> np.ndarray:
    """w_i = scale * (n - i) / n for i = 0..n-1."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return quality_vector(scale * (n - np.arange(n)) / n)


@dataclass(frozen=True)
class LinkFunction:
    """Increasing map from quality difference to win probability.

    ``kind`` is one of ``logistic`` (params: scale), ``linear`` (params:
    slope, floor, ceiling) or ``table`` (params: flattened sorted
    ``(x, y)`` breakpoints, piecewise linear with constant extrapolation).
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "logistic":
            (s,) = self.params
            if not s > 0:
                raise ValueError("logistic scale must be positive")
        elif self.kind == "linear":
            slope, lo, hi = self.params
            if not (slope > 0 and 0 < lo < 0.5 < hi < 1):
                raise ValueError("linear link needs slope > 0 and 0 < floor < 1/2 < ceiling < 1")
        elif self.kind == "table":
            xs, ys = self._table()
            if xs.size < 1:
                raise ValueError("table link needs at least one breakpoint")
            if np.any(np.diff(xs) <= 0):
                raise ValueError("table breakpoints must be strictly increasing in x")
            # weakly increasing on purpose: lets tests build flat (all-1/2) matrices
            if np.any(np.diff(ys) < 0):
                raise ValueError("table values must be non-decreasing")
            if np.any((ys <= 0) | (ys >= 1)):
                raise ValueError("table values must lie in (0, 1)")
        else:
            raise ValueError(f"unknown link kind {self.kind!r}")

    @classmethod
    def logistic(cls, scale: float = 1.0) -> "LinkFunction":
        return cls("logistic", (float(scale),))

    @classmethod
    def linear(cls, slope: float, floor: float = 0.05, ceiling: float = 0.95) -> "LinkFunction":
        return cls("linear", (float(slope), float(floor), float(ceiling)))

    @classmethod
    def table(cls, breakpoints: Sequence[tuple[float, float]]) -> "LinkFunction":
        flat = tuple(float(v) for xy in breakpoints for v in xy)
        return cls("table", flat)

    def _table(self):
        a = np.asarray(self.params, dtype=float).reshape(-1, 2)
        return a[:, 0], a[:, 1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "logistic":
            (s,) = self.params
            # numerically stable logistic
            return np.where(x >= 0, 1 / (1 + np.exp(-s * np.abs(x))),
                            np.exp(-s * np.abs(x)) / (1 + np.exp(-s * np.abs(x))))
        if self.kind == "linear":
            slope, lo, hi = self.params
            return np.clip(0.5 + slope * x, lo, hi)
        xs, ys = self._table()
        return np.interp(x, xs, ys)


# ---------------------------------------------------------------------------
# probability matrix


@dataclass(frozen=True)
class ProbMatrix:
    """n x n win-probability matrix, ``entries[i, j] = P(i beats j)``.

    ``ordered`` is True for ground-truth matrices whose rows are sorted by
    strength; shuffled matrices only satisfy antisymmetry.
    """

    entries: np.ndarray
    ordered: bool = True
    n_clamped: int = 0
    gamma_min: float = field(init=False)
    gamma_max: float = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 2:
            raise ValueError("ProbMatrix needs a square matrix with n >= 2")
        n = e.shape[0]
        if not np.all(np.diag(e) == 0.5):
            raise ValueError("diagonal must be exactly 1/2")
        off = e[~np.eye(n, dtype=bool)]
        if np.any((off <= 0) | (off >= 1)):
            raise ValueError("off-diagonal entries must lie in (0, 1)")
        if not np.all(e + e.T == 1.0):
            raise ValueError("entries must satisfy M[i,j] + M[j,i] = 1 exactly")
        if self.ordered and np.any(np.diff(e, axis=0) > 0):
            raise ValueError("rows are not ordered by strength (SST monotonicity)")
        object.__setattr__(self, "entries", _frozen(e))
        object.__setattr__(self, "gamma_min", float(off.min()))
        object.__setattr__(self, "gamma_max", float(off.max()))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_upper(cls, upper: np.ndarray, ordered: bool = True) -> "ProbMatrix":
        """Build from the strict upper triangle, mirroring ``1 - x`` below."""
        upper = np.asarray(upper, dtype=float)
        n = upper.shape[0]
        iu = np.triu_indices(n, 1)
        hi, lo = _mirror(upper[iu])
        e = np.full((n, n), 0.5)
        e[iu] = hi
        e.T[iu] = lo
        return cls(e, ordered=ordered)


def _mirror(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (x, y) with x + y == 1.0 exactly.

    1 - x is exact for x >= 1/2; below that x is nudged (by at most an ulp)
    to 1 - (1 - x) so the pair still sums to one.
    """
    x = np.array(vals, dtype=float)
    y = 1.0 - x
    small = x < 0.5
    x[small] = 1.0 - y[small]
    return x, y


def build_sst_matrix(w: Sequence[float], f: LinkFunction, eps: float = DEFAULT_CLAMP_EPS) -> ProbMatrix:
    """M[i, j] = clamp(F(w[i] - w[j])), only the upper triangle is evaluated."""
    w = quality_vector(w)
    if not 0 < eps < 0.5:
        raise ValueError("clamp eps must lie in (0, 1/2)")
    n = w.size
    iu = np.triu_indices(n, 1)
    raw = np.asarray(f(w[iu[0]] - w[iu[1]]), dtype=float)
    if np.any(~np.isfinite(raw)) or np.any((raw < 0) | (raw > 1)):
        raise ValueError("link produced values outside [0, 1]")
    vals = np.clip(raw, eps, 1 - eps)
    n_clamped = int(np.count_nonzero(vals != raw))
    if n_clamped:
        warnings.warn(f"{n_clamped} entries clamped into [{eps}, {1 - eps}]", ClampWarning, stacklevel=2)
    hi, lo = _mirror(vals)
    e = np.full((n, n), 0.5)
    e[iu] = hi
    e.T[iu] = lo
    return ProbMatrix(e, ordered=True, n_clamped=n_clamped)


# ---------------------------------------------------------------------------
# permutations


@dataclass(frozen=True)
class Permutation:
    """Bijection on [n]; ``map[r]`` is the observed label of true rank r."""

    map: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.map)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("permutation must be a non-empty 1-d array")
        if not np.issubdtype(a.dtype, np.integer):
            if not np.all(a == np.round(a)):
                raise ValueError("permutation entries must be integers")
        a = a.astype(np.int64)
        if not np.array_equal(np.sort(a), np.arange(a.size)):
            raise ValueError("not a bijection on [n]")
        object.__setattr__(self, "map", _frozen(a))

    @property
    def n(self) -> int:
        return self.map.size

    def __call__(self, i):
        return self.map[i]

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash(self.map.tobytes())

    def __repr__(self):
        return f"Permutation({self.map.tolist()})"

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def swap(cls, n: int, a: int, b: int) -> "Permutation":
        m = np.arange(n)
        m[[a, b]] = m[[b, a]]
        return cls(m)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(i) = self(other(i))."""
        if other.n != self.n:
            raise ValueError("size mismatch")
        return Permutation(self.map[other.map])


def apply_permutation(M: ProbMatrix, pi: Permutation) -> ProbMatrix:
    """Relabel so that M'[pi(i), pi(j)] = M[i, j]."""
    if pi.n != M.n:
        raise ValueError(f"permutation size {pi.n} does not match matrix size {M.n}")
    inv = pi.inverse().map
    shuffled = M.entries[np.ix_(inv, inv)]
    is_identity = np.array_equal(pi.map, np.arange(pi.n))
    return ProbMatrix(shuffled, ordered=M.ordered and is_identity, n_clamped=M.n_clamped)


def disagreement(p1: Permutation, p2: Permutation) -> float:
    """Fraction of positions where the two permutations differ."""
    if p1.n != p2.n:
        raise ValueError("size mismatch")
    return float(np.count_nonzero(p1.map != p2.map)) / p1.n


# ---------------------------------------------------------------------------
# gap statistics


@dataclass(frozen=True)
class GapStats:
    bar_delta: float
    sq_gap_indicator: float
    min_pair_sq_gap: float
    k0: float


def k0_of(M: ProbMatrix) -> float:
    return 1.0 / M.gamma_max + 1.0 / M.gamma_min


def pair_sq_gaps(M: ProbMatrix) -> np.ndarray:
    """S[i, j] = sum over l not in {i, j} of (M[i, l] - M[j, l])**2."""
    e = M.entries
    n = M.n
    d = e[:, None, :] - e[None, :, :]
    d2 = d**2
    idx = np.arange(n)
    # drop the l = i and l = j columns
    d2[idx, :, idx] = 0.0
    d2[:, idx, idx] = 0.0
    return d2.sum(axis=2)


def adjacent_sq_gaps(M: ProbMatrix) -> np.ndarray:
    """Excluded-column squared gap sums for the n - 1 adjacent pairs (i, i + 1)."""
    e = M.entries
    n = M.n
    d2 = (e[:-1] - e[1:]) ** 2
    i = np.arange(n - 1)
    d2[i, i] = 0.0
    d2[i, i + 1] = 0.0
    return d2.sum(axis=1)


def gap_stats(M: ProbMatrix) -> GapStats:
    if not M.ordered:
        raise ValueError("gap statistics are defined on the unshuffled (ordered) matrix only")
    e = M.entries
    n = M.n
    adj = e[:-1] - e[1:]
    bar_delta = float(np.min(adj.sum(axis=1)) / n)
    sq_ind = float(np.min((adj**2).sum(axis=1)) / n)
    S = pair_sq_gaps(M)
    min_pair = float(S[np.triu_indices(n, 1)].min())
    return GapStats(bar_delta=bar_delta, sq_gap_indicator=sq_ind, min_pair_sq_gap=min_pair, k0=k0_of(M))


# ---------------------------------------------------------------------------
# plain-text matrix format


def write_matrix(M: ProbMatrix, path) -> None:
    """First line n, then n rows of space-separated entries (17 significant digits)."""
    lines = [str(M.n)]
    for row in M.entries:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path, ordered: bool = True) -> ProbMatrix:
    tokens = Path(path).read_text(encoding="utf-8").split("\n")
    tokens = [t for t in tokens if t.strip()]
    if not tokens:
        raise ValueError(f"{path}: empty matrix file")
    n = int(tokens[0])
    rows = [[float(x) for x in t.split()] for t in tokens[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {n} rows of {n} entries")
    return ProbMatrix(np.array(rows), ordered=ordered)
