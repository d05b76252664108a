from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

__all__ = ["run_indexed"]

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_indexed(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply `fn` to every item; results come back in item order.

    `fn` and the items must be picklable when `threads > 1`.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(int(threads), len(items))
    logger.debug("dispatching %d work items to %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, item) for item in items]
        return [f.result() for f in futures]
