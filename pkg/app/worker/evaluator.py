import logging
from functools import partial
from typing import Any, Callable, List, Sequence, Tuple, TypeVar

import anyio
from anyio import to_process

logger = logging.getLogger("evaluator")

T = TypeVar("T")


async def _run_parallel(job: Callable[..., T], jobs: Sequence[Tuple[Any, ...]], workers: int) -> List[T]:
    results: List[Any] = [None] * len(jobs)
    limiter = anyio.CapacityLimiter(workers)

    async def _one(index: int, args: Tuple[Any, ...]) -> None:
        results[index] = await to_process.run_sync(job, *args, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index, args in enumerate(jobs):
            tg.start_soon(_one, index, args)
    return results


def run_jobs(job: Callable[..., T], jobs: Sequence[Tuple[Any, ...]], workers: int = 1) -> List[T]:
    """
    Run independent jobs, in-process when ``workers`` is 1, else across worker processes.

    Results come back in job order either way, so the fold over them is the same.
    ``job`` must be a module-level function and its arguments picklable.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [job(*args) for args in jobs]
    workers = min(workers, len(jobs))
    logger.info("dispatching %d jobs to %d worker processes", len(jobs), workers)
    return anyio.run(partial(_run_parallel, job, jobs, workers))
