"""Thread-pool helper with an environment-controlled worker cap.

Scans over independent cells (times, pairs, sites) may run on a pool, but
results are always collected in input order so reductions stay
deterministic regardless of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "LRLATTICE_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_THREADS} must be at least 1, got {n}")
        return n
    return os.cpu_count() or 1


def thread_map(fn, items):
    """Map ``fn`` over ``items``, in order, on at most worker_count() threads."""
    items = list(items)
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
