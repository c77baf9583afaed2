import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker cap from ``BROWNLAB_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get("BROWNLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn, items):
    """``[fn(x) for x in items]``, optionally threaded; result order is fixed."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
