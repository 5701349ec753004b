"""Worker-count policy shared by the harness and the CLI.

The cap comes from, in order: an explicit argument, the SO3FFT_THREADS
environment variable, then the machine's CPU count.  A cap of 0 means
"auto".  Trials are seeded independently, so the worker count never
changes numerical results, only wall-clock time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "SO3FFT_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Turn a requested worker count (None/0 = auto) into a concrete one."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0")
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(
                f"{THREADS_ENV} must be an integer, got {raw!r}"
            ) from None
    if requested < 0:
        raise ValueError(f"thread count must be >= 0, got {requested}")
    if requested == 0:
        return max(1, os.cpu_count() or 1)
    return requested


def parallel_map(fn, items, threads: int):
    """Map preserving input order; degrades to a plain loop for one worker."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
