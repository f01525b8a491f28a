"""Chunked thread-pool execution over the rulings of a grid.

The compiled kernels release the GIL, so threads give real speed-ups.
Chunks are contiguous and results are concatenated in input order, and
every ruling is integrated independently of its batch-mates, so outputs do
not depend on the thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "RULEDGEOM_THREADS"


def resolve_threads(requested=None):
    """``requested`` if given, else the environment variable, else 1."""
    if requested is None:
        env = os.environ.get(ENV_THREADS, "").strip()
        if not env:
            return 1
        try:
            requested = int(env)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {env!r}") from None
    if requested < 1:
        raise ValueError("thread count must be at least 1")
    return int(requested)


def map_chunks(fn, u, threads=1):
    """``[fn(chunk) for chunk in split(u)]`` run on ``threads`` workers."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if threads <= 1 or u.size < 2:
        return [fn(u)]
    chunks = [c for c in np.array_split(u, min(threads, u.size)) if c.size]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(fn, chunks))
