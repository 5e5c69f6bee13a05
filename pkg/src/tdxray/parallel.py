"""Deterministic data-parallel map.

TDXRAY_THREADS caps the worker count (default 1, sequential).  Results are
collected by input index, so the output order, and any reduction computed
from it, is independent of scheduling and thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TDXRAY_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
