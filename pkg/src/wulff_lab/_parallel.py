"""Optional thread parallelism, capped by the WULFF_LAB_THREADS env var.

All parallel call sites use order-preserving maps with deterministic
reductions, so results are identical at any thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("WULFF_LAB_THREADS", "")
    try:
        requested = int(raw) if raw else 1
    except ValueError:
        requested = 1
    return max(1, min(requested, os.cpu_count() or 1))


def map_fn(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
