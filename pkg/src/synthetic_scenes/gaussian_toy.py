"""Conditional Gaussian toy task with closed-form diffusion quantities.

Each condition is a one-hot vector over K classes and selects a mean
m_y; the data distribution is p(x_0 | y) = N(m_y, sigma^2 I). Under the
variance-preserving schedule every marginal stays Gaussian, so the score,
the posterior mean and the probability-flow map are all exact.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.diffusion_schedule.noise_schedule import NoiseSchedule, TimeLike

TOY_DIM = 5


def _column(values: TimeLike, like: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim and like.ndim > 1:
        return values[:, None]
    return values


@dataclass(frozen=True)
class GaussianToy:
    means: Tuple[Tuple[float, ...], ...]
    sigma: float = 0.2

    def __post_init__(self):
        arr = np.asarray(self.means, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != TOY_DIM:
            raise ValueError(
                f"{__name__} ERROR: means must have shape (K, {TOY_DIM}), "
                f"got {arr.shape}"
            )
        if self.sigma <= 0:
            raise ValueError(f"{__name__} ERROR: sigma must be positive")

    @classmethod
    def random(
        cls, k: int, rng: np.random.Generator, spread: float = 0.3,
        sigma: float = 0.2,
    ) -> "GaussianToy":
        means = rng.uniform(-spread, spread, size=(k, TOY_DIM))
        return cls(tuple(tuple(float(v) for v in row) for row in means), sigma)

    @property
    def k(self) -> int:
        return len(self.means)

    @property
    def cond_dim(self) -> int:
        return self.k

    def condition(self, label: int) -> np.ndarray:
        if not 0 <= label < self.k:
            raise ValueError(f"{__name__} ERROR: unknown class {label}")
        y = np.zeros(self.k)
        y[label] = 1.0
        return y

    def mean_of(self, y: np.ndarray) -> np.ndarray:
        """m_y for one condition (K,) or a batch (B, K)."""
        return np.asarray(y, dtype=float) @ np.asarray(self.means)

    def sample(
        self, n: int, rng: np.random.Generator
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Draw n pairs; returns (x0, y, labels)."""
        if n < 1:
            raise ValueError(f"{__name__} ERROR: need n >= 1, got {n}")
        labels = rng.integers(0, self.k, size=n)
        y = np.eye(self.k)[labels]
        x0 = self.mean_of(y) + self.sigma * rng.standard_normal((n, TOY_DIM))
        return x0, y, labels

    def marginal_var(self, t: TimeLike, schedule: NoiseSchedule) -> TimeLike:
        alpha = schedule.alpha(t)
        return alpha * self.sigma ** 2 + 1 - alpha

    def marginal_score(
        self, x_t: np.ndarray, t: TimeLike, y: np.ndarray,
        schedule: NoiseSchedule,
    ) -> np.ndarray:
        """grad log p(x_t | y).

        Equals -(x_t - sqrt(alpha) m_y) / (alpha sigma^2 + 1 - alpha).
        """
        x_t = np.asarray(x_t, dtype=float)
        alpha = _column(schedule.alpha(t), x_t)
        var = _column(self.marginal_var(t, schedule), x_t)
        return -(x_t - np.sqrt(alpha) * self.mean_of(y)) / var

    def posterior_mean(
        self, x_t: np.ndarray, t: TimeLike, y: np.ndarray,
        schedule: NoiseSchedule,
    ) -> np.ndarray:
        """E[x_0 | x_t, y]."""
        x_t = np.asarray(x_t, dtype=float)
        alpha = _column(schedule.alpha(t), x_t)
        var = _column(self.marginal_var(t, schedule), x_t)
        m = self.mean_of(y)
        gain = np.sqrt(alpha) * self.sigma ** 2 / var
        return m + gain * (x_t - np.sqrt(alpha) * m)

    def flow_map(
        self, x: np.ndarray, t_from: TimeLike, t_to: TimeLike, y: np.ndarray,
        schedule: NoiseSchedule,
    ) -> np.ndarray:
        """Exact probability-flow transport of x from t_from to t_to.

        Along the flow the standardized coordinate
        (x_t - sqrt(alpha_t) m) / sqrt(alpha_t sigma^2 + 1 - alpha_t)
        is constant.
        """
        x = np.asarray(x, dtype=float)
        m = self.mean_of(y)
        a_from = _column(schedule.alpha(t_from), x)
        a_to = _column(schedule.alpha(t_to), x)
        v_from = _column(self.marginal_var(t_from, schedule), x)
        v_to = _column(self.marginal_var(t_to, schedule), x)
        xi = (x - np.sqrt(a_from) * m) / np.sqrt(v_from)
        return np.sqrt(a_to) * m + np.sqrt(v_to) * xi
