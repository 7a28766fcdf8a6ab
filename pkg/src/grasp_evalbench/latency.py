"""Single-threaded latency benchmark of the samplers.

Every trial times one sampler call on one condition; the first
``warmup`` trials are discarded.
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.grasp_evalbench.evaluate import (
    SamplerSpec,
    latency_stats,
    make_predictor,
)
from src.grasp_trainer.checkpoint import TrainState
from src.synthetic_scenes.dataset import Sample

MIN_TRIALS = 30
WARMUP = 5

logger = logging.getLogger("EVALBENCH")


@dataclass(frozen=True)
class LatencyRow:
    sampler_id: str
    steps: int
    trials: int
    median: float
    p95: float


def time_spec(
    state: TrainState,
    spec: SamplerSpec,
    sample: Sample,
    trials: int = MIN_TRIALS,
    warmup: int = WARMUP,
    seed: int = 0,
) -> LatencyRow:
    if trials < MIN_TRIALS:
        raise ValueError(
            f"{__name__} ERROR: need trials >= {MIN_TRIALS}, got {trials}"
        )
    predict = make_predictor(state, spec)
    timings = []
    for trial in range(warmup + trials):
        rng = np.random.default_rng([seed, trial])
        start = time.perf_counter()
        predict(sample, rng)
        timings.append(time.perf_counter() - start)
    median, p95 = latency_stats(timings[warmup:])
    logger.info(
        f"{spec.sampler_id} P={spec.steps}: median {median:.6f} s, "
        f"p95 {p95:.6f} s"
    )
    return LatencyRow(spec.sampler_id, spec.steps, trials, median, p95)


def bench_latency(
    state: TrainState,
    specs: Sequence[SamplerSpec],
    sample: Sample,
    trials: int = MIN_TRIALS,
    warmup: int = WARMUP,
    seed: int = 0,
) -> List[LatencyRow]:
    """Median and p95 latency per sampler spec, measured one after another
    on the calling thread."""
    return [
        time_spec(state, spec, sample, trials, warmup, seed) for spec in specs
    ]


def find_row(
    rows: Sequence[LatencyRow], spec: SamplerSpec
) -> Optional[LatencyRow]:
    for row in rows:
        if (row.sampler_id, row.steps) == (spec.sampler_id, spec.steps):
            return row
    return None


@dataclass(frozen=True)
class CallCost:
    """Affine latency model: median ~= overhead + per_call * calls."""

    overhead: float
    per_call: float

    def predict(self, spec: SamplerSpec) -> float:
        return self.overhead + self.per_call * spec.network_calls


def fit_call_cost(
    rows: Sequence[LatencyRow], specs: Sequence[SamplerSpec]
) -> CallCost:
    """Least-squares fit of the median latency against network calls."""
    calls = [spec.network_calls for spec in specs]
    if len(set(calls)) < 2:
        raise ValueError(
            f"{__name__} ERROR: need at least two distinct call counts"
        )
    medians = []
    for spec in specs:
        row = find_row(rows, spec)
        if row is None:
            raise ValueError(
                f"{__name__} ERROR: no latency row for {spec.sampler_id} "
                f"P={spec.steps}"
            )
        medians.append(row.median)
    per_call, overhead = np.polyfit(calls, medians, 1)
    return CallCost(float(overhead), float(per_call))
