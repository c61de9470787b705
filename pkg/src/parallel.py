"""Worker pool whose results come back in input order."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar('T')
R = TypeVar('R')

logger = logging.getLogger('baersaxl.parallel')

# Log progress every this many finished items
PROGRESS_EVERY = 50


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1,
                label: str = 'items') -> List[R]:
    """
    Apply fn to every item with up to `jobs` threads.

    Results are returned in input order, so output never depends on the worker
    count or on which worker finished first.
    """
    items = list(items)
    total = len(items)
    if jobs <= 1 or total < 2:
        results = []
        for n, item in enumerate(items, 1):
            results.append(fn(item))
            if n % PROGRESS_EVERY == 0:
                logger.info("%s: %d/%d", label, n, total)
        return results

    results = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for n, result in enumerate(pool.map(fn, items), 1):
            results.append(result)
            if n % PROGRESS_EVERY == 0:
                logger.info("%s: %d/%d", label, n, total)
    return results
