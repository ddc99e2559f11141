from typing import Sequence

import numpy as np

from app.schemas.results import EpisodeResult, EvalStats, MetricStats


def summarize(values: Sequence[float]) -> MetricStats:
    """Box-plot summary; quartiles interpolate linearly between order statistics."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q1, median, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return MetricStats(
        mean=float(arr.mean()),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        min=float(arr.min()),
        max=float(arr.max()),
    )


def eval_stats(results: Sequence[EpisodeResult]) -> EvalStats:
    return EvalStats(
        n=len(results),
        avg_queue_length=summarize([r.avg_queue_length for r in results]),
        avg_wait_time=summarize([r.avg_wait_time for r in results]),
    )


def improvement_pct(baseline: float, candidate: float) -> float:
    if baseline <= 0.0:
        return 0.0
    return 100.0 * (baseline - candidate) / baseline
