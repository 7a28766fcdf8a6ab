"""Score-matching, consistency and detection losses.

Each loss returns its batch-mean value and accumulates the gradient of
that value into the ``grads`` buffers of the one network it trains. Callers
zero the buffers before a step. The weighting lambda(t) comes from
``NoiseSchedule.weight``.

The random draws (times or grid indices, then Gaussian noise) can be
passed in explicitly; otherwise they come from ``rng`` in that order.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from src.diffusion_schedule.noise_schedule import NoiseSchedule, TimeGrid
from src.probability_flow.fields import NetworkScoreField
from src.probability_flow.ode import euler_step
from src.score_network.heads import POSE_DIM, ConsistencyNet, EmaCopy, ScoreNet


class Batch(NamedTuple):
    x0: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class LossBreakdown:
    score: float
    consistency: float
    detection: float

    @property
    def total(self) -> float:
        return self.consistency + self.detection

    def as_row(self):
        return [self.score, self.consistency, self.detection, self.total]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_row())))


def _check_batch(batch: Batch) -> Batch:
    x0 = np.atleast_2d(np.asarray(batch.x0, dtype=float))
    y = np.atleast_2d(np.asarray(batch.y, dtype=float))
    if x0.shape[0] == 0 or x0.size == 0:
        raise ValueError(f"{__name__} ERROR: empty batch")
    if x0.shape[1] != POSE_DIM or y.shape[0] != x0.shape[0]:
        raise ValueError(
            f"{__name__} ERROR: malformed batch, x0 {x0.shape}, y {y.shape}"
        )
    return Batch(x0, y)


def _draw_noise(z, shape, rng):
    if z is None:
        return rng.standard_normal(shape)
    z = np.asarray(z, dtype=float)
    if z.shape != shape:
        raise ValueError(f"{__name__} ERROR: noise shape {z.shape} != {shape}")
    return z


def _draw_indices(indices, low, high, n, rng):
    """Indices in [low, high) of a grid, 0-based."""
    if indices is None:
        return rng.integers(low, high, size=n)
    indices = np.asarray(indices, dtype=int)
    if indices.shape != (n,) or np.any((indices < low) | (indices >= high)):
        raise ValueError(
            f"{__name__} ERROR: grid indices out of range: {indices}"
        )
    return indices


def _weighted_mse(residual, weight):
    """mean_b lambda_b |r_b|^2 and its gradient with respect to the
    prediction."""
    n = residual.shape[0]
    value = float(np.mean(weight * np.sum(residual ** 2, axis=1)))
    upstream = 2 * weight[:, None] * residual / n
    return value, upstream


def score_loss(
    net: ScoreNet,
    batch: Batch,
    schedule: NoiseSchedule,
    rng: Optional[np.random.Generator] = None,
    t: Optional[np.ndarray] = None,
    z: Optional[np.ndarray] = None,
) -> float:
    """Denoising score matching against grad log p(x_t | x_0).

    The target's variance is floored at 1 - alpha(epsilon).
    """
    x0, y = _check_batch(batch)
    n = x0.shape[0]
    if t is None:
        t = rng.uniform(0.0, schedule.T, size=n)
    t = np.broadcast_to(np.asarray(t, dtype=float), (n,))
    z = _draw_noise(z, x0.shape, rng)

    mean, std = schedule.perturbation_params(t, x0)
    x_t = schedule.noised(mean, std, z)
    floor = 1 - schedule.alpha(schedule.epsilon)
    var = np.maximum(1 - schedule.alpha(t), floor)
    target = -(x_t - mean) / var[:, None]

    pred = net.forward(x_t, t, y)
    value, upstream = _weighted_mse(pred - target, schedule.weight(t))
    net.backward(upstream)
    return value


def consistency_loss(
    f: ConsistencyNet,
    f_star: EmaCopy,
    s_net: ScoreNet,
    grid: TimeGrid,
    batch: Batch,
    schedule: NoiseSchedule,
    rng: Optional[np.random.Generator] = None,
    indices: Optional[np.ndarray] = None,
    z: Optional[np.ndarray] = None,
) -> float:
    """Distance between f at t_{i+1} and the EMA target at the Euler
    estimate of t_i.

    ``indices`` are 0-based positions of t_i in the grid, in [0, N - 2].
    Only f accumulates gradients: the score network and the target are
    evaluated without a tape.
    """
    x0, y = _check_batch(batch)
    n = x0.shape[0]
    points = grid.as_array()
    idx = _draw_indices(indices, 0, len(points) - 1, n, rng)
    t_lo, t_hi = points[idx], points[idx + 1]
    z = _draw_noise(z, x0.shape, rng)

    mean, std = schedule.perturbation_params(t_hi, x0)
    x_hi = schedule.noised(mean, std, z)
    x_hat = euler_step(NetworkScoreField(s_net), x_hi, t_hi, t_lo, y, schedule)
    target = f_star.evaluate(f, x_hat, t_lo, y)

    pred = f.forward(x_hi, t_hi, y)
    value, upstream = _weighted_mse(pred - target, schedule.weight(t_lo))
    f.backward(upstream)
    return value


def detection_loss(
    f: ConsistencyNet,
    grid: TimeGrid,
    batch: Batch,
    schedule: NoiseSchedule,
    rng: Optional[np.random.Generator] = None,
    indices: Optional[np.ndarray] = None,
    z: Optional[np.ndarray] = None,
) -> float:
    """Distance between f(x_{t_i}, t_i, y) and x_0, i over the whole grid."""
    x0, y = _check_batch(batch)
    n = x0.shape[0]
    points = grid.as_array()
    idx = _draw_indices(indices, 0, len(points), n, rng)
    t = points[idx]
    z = _draw_noise(z, x0.shape, rng)

    mean, std = schedule.perturbation_params(t, x0)
    pred = f.forward(schedule.noised(mean, std, z), t, y)
    value, upstream = _weighted_mse(pred - x0, schedule.weight(t))
    f.backward(upstream)
    return value


def total_loss(
    f: ConsistencyNet,
    f_star: EmaCopy,
    s_net: ScoreNet,
    grid: TimeGrid,
    batch: Batch,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
) -> LossBreakdown:
    """All three losses for one step.

    Gradients land in ``s_net`` (score) and ``f`` (consistency plus
    detection); the two are optimized separately.
    """
    score = score_loss(s_net, batch, schedule, rng)
    consistency = consistency_loss(
        f, f_star, s_net, grid, batch, schedule, rng
    )
    detection = detection_loss(f, grid, batch, schedule, rng)
    return LossBreakdown(score, consistency, detection)
