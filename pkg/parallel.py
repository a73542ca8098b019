"""
Parallel - Bounded concurrent map with deterministic result order

Independent work items (norm starts, ensemble members, search restarts,
probe cells) are gathered concurrently on worker threads. Results always
come back in input order, so every downstream merge is independent of
scheduling.
"""

import asyncio
import logging
import os
from typing import Callable, List, Optional, Sequence, TypeVar

from errors import UsageError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """
    Number of worker threads to use

    Args:
        threads: Explicit count; None falls back to HLLAB_THREADS, then to
            the number of available CPUs

    Returns:
        A positive thread count
    """
    if threads is None:
        env_value = os.getenv("HLLAB_THREADS")
        if env_value:
            try:
                threads = int(env_value)
            except ValueError:
                raise UsageError(f"HLLAB_THREADS must be an integer, got {env_value!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise UsageError(f"thread count must be >= 1, got {threads}")
    return threads


async def gather_ordered(fn: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    """Run fn over items on at most `threads` worker threads, keeping input order"""
    semaphore = asyncio.Semaphore(threads)

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    tasks = [run_one(item) for item in items]
    # The first failure propagates; no partial results are merged
    return await asyncio.gather(*tasks)


def map_ordered(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = 1) -> List[R]:
    """
    Apply fn to every item, concurrently when threads > 1

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Worker bound (None resolves from the environment)

    Returns:
        [fn(item) for item in items], in input order
    """
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("Dispatching %d items on %d threads", len(items), threads)
    return asyncio.run(gather_ordered(fn, items, threads))
