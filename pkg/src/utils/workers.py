"""
Process pool helper for independent runs (sweeps, trials, support chunks).

Results always come back in task order so downstream CSV assembly is
deterministic regardless of the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(fn: Callable[[T], R], tasks: Iterable[T], jobs: int = 1) -> List[R]:
    """Map fn over tasks, in-process when jobs <= 1, else on a process pool.

    fn and the tasks must be picklable when jobs > 1.
    """
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))
