"""Order-preserving parallel map over independent trials."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def pmap(fn, items, workers: int = 1, chunk: int = 64):
    """``[fn(x) for x in items]``, optionally on a thread pool.

    Results come back in input order, so any aggregation downstream is
    independent of the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
