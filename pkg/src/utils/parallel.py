"""Deterministic fan-out of independent work items over a joblib pool."""

from typing import Any, Callable, Iterator, List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .logger import get_logger
from .progress import create_progress_bar

logger = get_logger(__name__)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """
    Independent random stream for one trial.

    The stream depends only on (seed, index), so trials can be executed in any
    order or on any worker without changing their draws.

    Args:
        seed: Run seed
        index: Trial index

    Returns:
        numpy Generator instance
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def chunk_ranges(total: int, chunk_size: int) -> List[Tuple[int, int]]:
    """
    Split [0, total) into fixed half-open ranges.

    Chunk boundaries depend only on total and chunk_size, never on the worker
    count.

    Args:
        total: Number of items
        chunk_size: Items per chunk

    Returns:
        List of (start, stop) pairs
    """
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def run_ordered(
    func: Callable[[Any], Any],
    items: Sequence[Any],
    workers: int = 1,
    desc: str = "Processing",
    unit: str = "items"
) -> List[Any]:
    """
    Apply func to every item and return results in input order.

    Args:
        func: Picklable callable applied to each item
        items: Work items
        workers: Number of joblib workers (1 runs inline)
        desc: Progress bar description
        unit: Progress bar unit

    Returns:
        List of results aligned with items
    """
    pbar = create_progress_bar(total=len(items), desc=desc, unit=unit)
    results: List[Any] = []

    if workers <= 1 or len(items) <= 1:
        for item in items:
            results.append(func(item))
            pbar.update(1)
    else:
        logger.debug(f"Dispatching {len(items)} {unit} to {workers} workers")
        stream: Iterator[Any] = Parallel(n_jobs=workers, return_as="generator")(
            delayed(func)(item) for item in items
        )
        for result in stream:
            results.append(result)
            pbar.update(1)

    pbar.close()
    return results
