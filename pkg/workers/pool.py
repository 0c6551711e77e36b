import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(max_workers: Optional[int] = None) -> int:
    workers = max_workers if max_workers is not None else settings.max_workers
    return max(1, workers or os.cpu_count() or 1)


def ordered_map(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """Map fn over items on a thread pool; results keep input order"""
    items = list(items)
    workers = min(resolve_workers(max_workers), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    logger.debug(f"Dispatching {len(items)} tasks to {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
