"""Deterministic fan-out for independent point evaluations."""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, workers: int = 1) -> list:
    """Map fn over items, preserving order regardless of worker count.

    Results are gathered in input order, so any later reduction sees the
    same sequence whether the work ran on one thread or many.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
