"""Success-rate evaluation on the seen and unseen splits.

Each test sample gets exactly one sampler invocation, seeded from
(seed, sample index), so counts do not depend on thread sharding. The
timer wraps the sampler call only; conditions are encoded when the
dataset is built.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.grasp_geometry.rectangle import decode_pose, harmonic_mean, is_success
from src.grasp_trainer.checkpoint import TrainState
from src.probability_flow.fields import NetworkScoreField
from src.probability_flow.samplers import (
    sample_consistency,
    sample_ddpm_baseline,
)
from src.synthetic_scenes.dataset import Sample

SAMPLER_KINDS = ("consistency", "ddpm")
SPLITS = ("seen", "unseen")

logger = logging.getLogger("EVALBENCH")

# (sample, rng) -> normalized pose vector
Predictor = Callable[[Sample, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    steps: int

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(
                f"{__name__} ERROR: sampler kind must be one of "
                f"{SAMPLER_KINDS}, got {self.kind!r}"
            )
        if self.steps < 1:
            raise ValueError(
                f"{__name__} ERROR: sampler steps must be >= 1, "
                f"got {self.steps}"
            )

    @property
    def sampler_id(self) -> str:
        return self.kind

    @property
    def network_calls(self) -> int:
        """Network evaluations per sample."""
        if self.kind == "consistency":
            return 1 + max(0, self.steps - 2)
        return self.steps


def parse_steps_list(text: str) -> List[int]:
    """'1,3,10' -> [1, 3, 10]."""
    try:
        steps = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ValueError(f"{__name__} ERROR: bad steps list {text!r}")
    if not steps or min(steps) < 1:
        raise ValueError(
            f"{__name__} ERROR: steps list must hold positive ints, "
            f"got {text!r}"
        )
    return steps


@dataclass(frozen=True)
class SplitResult:
    n: int
    successes: int
    single_n: int = 0
    single_successes: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.n if self.n else 0.0

    @property
    def cluttered_n(self) -> int:
        return self.n - self.single_n

    @property
    def cluttered_successes(self) -> int:
        return self.successes - self.single_successes

    @property
    def single_rate(self) -> float:
        return self.single_successes / self.single_n if self.single_n else 0.0

    @property
    def cluttered_rate(self) -> float:
        n = self.cluttered_n
        return self.cluttered_successes / n if n else 0.0


@dataclass(frozen=True)
class EvalReport:
    sampler_id: str
    steps: int
    seen: SplitResult
    unseen: SplitResult
    latency_median: float
    latency_p95: float
    seed: int
    config_hash: str

    @property
    def seen_rate(self) -> float:
        return self.seen.rate

    @property
    def unseen_rate(self) -> float:
        return self.unseen.rate

    @property
    def harmonic(self) -> float:
        return harmonic_mean(self.seen_rate, self.unseen_rate)

    def split(self, name: str) -> SplitResult:
        return self.seen if name == "seen" else self.unseen


class Outcome(NamedTuple):
    success: bool
    latency: float
    single: bool


def latency_stats(latencies: Sequence[float]) -> Tuple[float, float]:
    """(median, p95) in seconds; NaN for an empty list."""
    if len(latencies) == 0:
        return math.nan, math.nan
    arr = np.asarray(latencies, dtype=float)
    return float(np.median(arr)), float(np.percentile(arr, 95))


def _score(sample: Sample, predict: Predictor, seed: int) -> Outcome:
    rng = np.random.default_rng([seed, sample.index])
    single = len(sample.scene.objects) == 1
    start = time.perf_counter()
    try:
        vector = predict(sample, rng)
    except Exception as err:
        logger.warning(f"Sampler failed on sample {sample.index}: {err!r}")
        return Outcome(False, time.perf_counter() - start, single)
    latency = time.perf_counter() - start
    try:
        vector = np.asarray(vector, dtype=float).reshape(-1)
        pose = decode_pose(vector, sample.scene.extent)
        ok = is_success(pose, sample.gt_grasps)
    except ValueError as err:
        logger.warning(
            f"Undecodable prediction for sample {sample.index}: {err}"
        )
        ok = False
    return Outcome(ok, latency, single)


def evaluate_predictor(
    samples: Sequence[Sample], predict: Predictor, seed: int, threads: int = 1
) -> List[Outcome]:
    """One prediction per sample, in sample order."""
    if threads < 1:
        raise ValueError(f"{__name__} ERROR: need threads >= 1, got {threads}")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: _score(s, predict, seed), samples))


def summarize(outcomes: Sequence[Outcome]) -> SplitResult:
    return SplitResult(
        n=len(outcomes),
        successes=sum(o.success for o in outcomes),
        single_n=sum(o.single for o in outcomes),
        single_successes=sum(o.success and o.single for o in outcomes),
    )


def make_predictor(state: TrainState, spec: SamplerSpec) -> Predictor:
    """Wrap the checkpoint's networks as a one-sample predictor."""
    schedule = state.config.schedule()
    if spec.kind == "consistency":
        net = state.sampling_net()

        def predict(sample: Sample, rng: np.random.Generator) -> np.ndarray:
            y = np.asarray(sample.condition, dtype=float)[None, :]
            return sample_consistency(net, y, spec.steps, schedule, rng).x0[0]

    else:
        field = NetworkScoreField(state.score_net)

        def predict(sample: Sample, rng: np.random.Generator) -> np.ndarray:
            y = np.asarray(sample.condition, dtype=float)[None, :]
            result = sample_ddpm_baseline(field, y, spec.steps, schedule, rng)
            return result.x0[0]

    return predict


def evaluate_samples(
    samples: Sequence[Sample],
    predict: Predictor,
    sampler_id: str,
    steps: int,
    seed: int,
    config_hash: str = "",
    threads: int = 1,
) -> EvalReport:
    if len(samples) == 0:
        raise ValueError(f"{__name__} ERROR: nothing to evaluate")
    outcomes = evaluate_predictor(samples, predict, seed, threads)
    by_split = {
        name: summarize(
            [o for s, o in zip(samples, outcomes) if s.split_tag == name]
        )
        for name in SPLITS
    }
    median, p95 = latency_stats([o.latency for o in outcomes])
    report = EvalReport(
        sampler_id,
        steps,
        by_split["seen"],
        by_split["unseen"],
        median,
        p95,
        seed,
        config_hash,
    )
    seen, unseen = report.seen, report.unseen
    logger.info(
        f"{sampler_id} P={steps}: seen {seen.successes}/{seen.n}, "
        f"unseen {unseen.successes}/{unseen.n}, H={report.harmonic:.3f}"
    )
    return report


def evaluate(
    state: TrainState,
    samples: Sequence[Sample],
    spec: SamplerSpec,
    seed: int,
    threads: int = 1,
) -> EvalReport:
    """Success rates of one sampler configuration on every split present
    in ``samples``. The state is only read."""
    return evaluate_samples(
        samples,
        make_predictor(state, spec),
        spec.sampler_id,
        spec.steps,
        seed,
        state.config_hash,
        threads,
    )


def holdout_success_rate(
    state: TrainState,
    samples: Sequence[Sample],
    steps: int,
    seed: Optional[int] = None,
) -> float:
    """Batched consistency-sampler success rate used during training."""
    if len(samples) == 0:
        return 0.0
    seed = state.config.seed if seed is None else seed
    rng = np.random.default_rng([seed, state.step, 3])
    y = np.asarray([s.condition for s in samples], dtype=float)
    x0 = sample_consistency(
        state.sampling_net(), y, steps, state.config.schedule(), rng
    ).x0
    hits = sum(
        is_success(decode_pose(v, s.scene.extent), s.gt_grasps)
        for v, s in zip(x0, samples)
    )
    return hits / len(samples)
