"""
Process-pool fan-out shared by the sweeps and the coprimality sampler.

Results come back in task order, so callers get the same output whatever the
worker count.
"""

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

from errors import ParameterError

logger = logging.getLogger(__name__)

TaskT = TypeVar("TaskT")
ResultT = TypeVar("ResultT")


def get_worker_count() -> int:
    """Worker processes for sweeps, from LATREG_WORKERS (default 1)."""
    raw = os.getenv("LATREG_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        msg = f"LATREG_WORKERS must be an integer, got {raw!r}"
        raise ParameterError(msg) from None
    if workers < 1:
        msg = f"LATREG_WORKERS must be >= 1, got {workers}"
        raise ParameterError(msg)
    return workers


def map_tasks(
    func: Callable[[TaskT], ResultT], tasks: Sequence[TaskT], workers: int | None = None
) -> list[ResultT]:
    """
    Apply a picklable top-level function to every task.

    Args:
        func: Module-level function, so worker processes can import it
        tasks: Picklable task descriptions
        workers: Process count; None reads LATREG_WORKERS

    Returns:
        Results in the order of tasks
    """
    workers = get_worker_count() if workers is None else workers
    if workers < 1:
        msg = f"workers must be >= 1, got {workers}"
        raise ParameterError(msg)
    if workers == 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug("running %d tasks on %d processes", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))
