"""
Process-pool map with results in input order
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from tqdm import tqdm

from config import DEFAULT_JOBS, SHOW_PROGRESS

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = DEFAULT_JOBS, desc: str = "") -> List[R]:
    """
    Apply fn to every item, in worker processes when jobs > 1

    Args:
        fn: Picklable top-level function
        items: Inputs
        jobs: Worker count; 1 runs in the calling process
        desc: Progress bar label

    Returns:
        Results in the order of the inputs
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, disable=not SHOW_PROGRESS, desc=desc)]
    workers = min(jobs, len(items))
    logger.debug(f"Mapping {len(items)} items over {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), disable=not SHOW_PROGRESS, desc=desc))
