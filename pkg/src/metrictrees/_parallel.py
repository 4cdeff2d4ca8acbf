"""Order-preserving chunked execution.

Work is split into contiguous index ranges and results are returned in
range order, so any reduction done afterwards is independent of how many
workers ran. Kernels release the GIL, so threads give real parallelism.
"""

import os
from concurrent.futures import ThreadPoolExecutor

_default_threads = None


def set_default_threads(n):
    global _default_threads
    _default_threads = None if n is None else max(1, int(n))


def resolve_threads(threads=None):
    if threads is None:
        threads = _default_threads
    if threads is None:
        threads = os.cpu_count() or 1
    return max(1, int(threads))


def chunk_ranges(total, chunk):
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def run_chunked(fn, total, chunk=4096, threads=None):
    """Call ``fn(lo, hi)`` over contiguous ranges; results in range order."""
    ranges = chunk_ranges(total, chunk)
    threads = resolve_threads(threads)
    if threads == 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))
