"""Order-preserving worker pool for seed-indexed Monte Carlo replicates."""

from __future__ import annotations

import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["parallel_map", "resolve_jobs"]


def resolve_jobs(jobs: int) -> int:
    """Apply the MRGG_JOBS override and clamp to at least one worker."""
    env = os.environ.get("MRGG_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError as exc:
            raise ValueError(f"MRGG_JOBS must be an integer, got {env!r}") from exc
    return max(1, jobs)


def parallel_map(fn, tasks, jobs: int) -> list:
    """Map a module-level callable over tasks, preserving task order.

    With more than one worker the tasks run in spawned processes pinned to
    single-threaded BLAS so workers do not oversubscribe each other.
    """
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    keep = {k: os.environ.get(k) for k in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS")}
    os.environ["OMP_NUM_THREADS"] = "1"
    os.environ["OPENBLAS_NUM_THREADS"] = "1"
    try:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=mp.get_context("spawn")) as pool:
            return list(pool.map(fn, tasks, chunksize=1))
    finally:
        for key, val in keep.items():
            if val is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = val
