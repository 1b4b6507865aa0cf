"""Order-preserving parallel map used by the Monte Carlo drivers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "RANKLIMITS_THREADS"


def resolve_threads(threads: int | None) -> int:
    """0 or None means auto: $RANKLIMITS_THREADS, else the CPU count."""
    if threads is None or threads == 0:
        env = os.environ.get(THREADS_ENV)
        if env:
            threads = int(env)
        if not threads:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int | None = 1) -> list[R]:
    """Apply fn to every item; results come back in input order regardless of threads."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
