"""Few-step consistency sampling and the many-step ancestral baseline."""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.diffusion_schedule.noise_schedule import NoiseSchedule
from src.probability_flow.fields import ConsistencyFn, ScoreField
from src.probability_flow.ode import Trajectory
from src.score_network.heads import POSE_DIM

logger = logging.getLogger("SAMPLER")


@dataclass(frozen=True)
class SampleResult:
    x0: np.ndarray
    timings: Tuple[float, ...]
    evaluations: int
    estimates: Optional[Trajectory] = None


def _batch_size(y: np.ndarray) -> int:
    y = np.asarray(y)
    return 1 if y.ndim < 2 else y.shape[0]


def inference_times(P: int, schedule: NoiseSchedule) -> np.ndarray:
    """t_1 = epsilon < ... < t_P = T, evenly spaced; just (T,) for P = 1."""
    if P < 1:
        raise ValueError(f"{__name__} ERROR: need P >= 1, got {P}")
    if P == 1:
        return np.array([schedule.T])
    points = np.linspace(schedule.epsilon, schedule.T, P)
    points[0], points[-1] = schedule.epsilon, schedule.T
    return points


def sample_consistency(
    f: ConsistencyFn,
    y: np.ndarray,
    P: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
    keep_estimates: bool = False,
) -> SampleResult:
    """Multistep consistency sampling.

    One evaluation at T, then for i = P-1 down to 2 the current estimate
    is re-noised to t_i and mapped back. Evaluations: 1 + max(0, P - 2).
    """
    times = inference_times(P, schedule)
    n = _batch_size(y)
    timings: List[float] = []
    est_times, estimates = [], []

    x_T = rng.standard_normal((n, POSE_DIM))
    start = time.perf_counter()
    x0 = f.evaluate(x_T, schedule.T, y)
    timings.append(time.perf_counter() - start)
    est_times.append(float(schedule.T))
    estimates.append(x0)

    for i in range(P - 1, 1, -1):
        t_i = float(times[i - 1])
        start = time.perf_counter()
        z = rng.standard_normal(x0.shape)
        mean, std = schedule.perturbation_params(t_i, x0)
        x0 = f.evaluate(schedule.noised(mean, std, z), t_i, y)
        timings.append(time.perf_counter() - start)
        est_times.append(t_i)
        estimates.append(x0)

    logger.debug(f"Sampled {n} poses with P={P} in {sum(timings):.4f} s")
    trajectory = None
    if keep_estimates:
        trajectory = Trajectory(tuple(est_times), tuple(estimates))
    return SampleResult(x0, tuple(timings), len(timings), trajectory)


def sample_ddpm_baseline(
    field: ScoreField,
    y: np.ndarray,
    steps: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
    clip_denoised: bool = True,
    keep_trajectory: bool = False,
) -> SampleResult:
    """Ancestral sampling on ``steps`` uniform intervals from T to 0.

    The score is converted to a noise prediction with
    eps = -sqrt(1 - alpha_t) * score, and each step draws from the
    Gaussian posterior q(x_s | x_t, x0_hat).
    """
    if steps < 1:
        raise ValueError(f"{__name__} ERROR: need steps >= 1, got {steps}")
    n = _batch_size(y)
    times = np.linspace(schedule.T, 0.0, steps + 1)
    times[0], times[-1] = schedule.T, 0.0
    x = rng.standard_normal((n, POSE_DIM))
    states, timings = [x], []

    for t, s in zip(times, times[1:]):
        start = time.perf_counter()
        abar_t = float(schedule.alpha(t))
        abar_s = float(schedule.alpha(s))
        alpha_step = abar_t / abar_s
        beta = 1 - alpha_step
        eps_hat = -np.sqrt(1 - abar_t) * field(x, t, y)
        x0_hat = (x - np.sqrt(1 - abar_t) * eps_hat) / np.sqrt(abar_t)
        if clip_denoised:
            x0_hat = np.clip(x0_hat, -1.0, 1.0)
        coef_x0 = np.sqrt(abar_s) * beta / (1 - abar_t)
        coef_xt = np.sqrt(alpha_step) * (1 - abar_s) / (1 - abar_t)
        x = coef_x0 * x0_hat + coef_xt * x
        if s > 0:
            var = beta * (1 - abar_s) / (1 - abar_t)
            x = x + np.sqrt(var) * rng.standard_normal(x.shape)
        timings.append(time.perf_counter() - start)
        states.append(x)

    logger.debug(f"Baseline sampled {n} poses with {steps} steps")
    trajectory = None
    if keep_trajectory:
        trajectory = Trajectory(tuple(float(t) for t in times), tuple(states))
    return SampleResult(x, tuple(timings), steps, trajectory)
