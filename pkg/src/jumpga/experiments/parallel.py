"""Replicate-level parallelism.

Compiled kernels release the GIL, so a thread pool gives real parallelism.
Results are gathered by replicate index; seeds never depend on the thread
that happens to run a task.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def map_replicates(fn: Callable[[int], T], repetitions: int, threads: int | None = None) -> list[T]:
    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1 or repetitions <= 1:
        return [fn(i) for i in range(repetitions)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(repetitions)))
