"""Continuous-time variance-preserving noise schedule.

Forward SDE: dx = -1/2 gamma(t) x dt + sqrt(gamma(t)) dw, with a linear
gamma ramp. Everything the rest of the package needs about the forward
process is a closed form of gamma:

    rho(t)   = -int_0^t gamma(s) ds
    alpha(t) = exp(rho(t))
    x_t | x_0 ~ N(sqrt(alpha(t)) x_0, (1 - alpha(t)) I)

Time stays in schedule units ([0, T], T = 1000 by default). All queries
accept scalars or numpy arrays of times.
"""
from dataclasses import asdict, dataclass
from typing import Dict, Tuple, Union

import numpy as np

TimeLike = Union[float, np.ndarray]
TERMINAL_ALPHA_LIMIT = 1e-3


class ScheduleDomainError(ValueError):
    """Raised when a time lies outside [0, T]."""


@dataclass(frozen=True)
class TimeGrid:
    points: Tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError(
                f"{__name__} ERROR: a time grid needs at least 2 points"
            )
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError(
                f"{__name__} ERROR: time grid must be strictly increasing"
            )

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True)
class NoiseSchedule:
    gamma_min: float = 1e-4
    gamma_max: float = 2e-2
    T: float = 1000.0
    epsilon: float = 1.0

    def __post_init__(self):
        if not 0 < self.epsilon < self.T:
            raise ValueError(
                f"{__name__} ERROR: need 0 < epsilon < T, got "
                f"epsilon={self.epsilon}, T={self.T}"
            )
        if not 0 < self.gamma_min <= self.gamma_max:
            raise ValueError(
                f"{__name__} ERROR: need 0 < gamma_min <= gamma_max, got "
                f"{self.gamma_min}, {self.gamma_max}"
            )
        if self.alpha(self.T) >= TERMINAL_ALPHA_LIMIT:
            raise ValueError(
                f"{__name__} ERROR: alpha(T)={self.alpha(self.T):.3g} is not "
                f"close enough to pure noise"
            )

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def _check(self, t: TimeLike) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.T) or np.any(np.isnan(arr)):
            raise ScheduleDomainError(
                f"{__name__} ERROR: time outside [0, {self.T}]: {t}"
            )
        return arr

    def gamma(self, t: TimeLike) -> TimeLike:
        t = self._check(t)
        return self.gamma_min + (self.gamma_max - self.gamma_min) * t / self.T

    def rho(self, t: TimeLike) -> TimeLike:
        t = self._check(t)
        return -(
            self.gamma_min * t
            + (self.gamma_max - self.gamma_min) * t ** 2 / (2 * self.T)
        )

    def alpha(self, t: TimeLike) -> TimeLike:
        return np.exp(self.rho(t))

    def weight(self, t: TimeLike) -> TimeLike:
        """Loss weighting lambda(t); uniform."""
        return np.ones_like(self._check(t))

    def perturbation_params(
        self, t: TimeLike, x0: np.ndarray
    ) -> Tuple[np.ndarray, TimeLike]:
        """Mean and standard deviation of x_t given x_0."""
        alpha = self.alpha(t)
        x0 = np.asarray(x0, dtype=float)
        scale = np.sqrt(alpha)
        if np.ndim(scale) and x0.ndim > 1:
            scale = scale[:, None]
        return scale * x0, np.sqrt(1 - alpha)

    def transition_params(
        self, s: TimeLike, t: TimeLike, xs: np.ndarray
    ) -> Tuple[np.ndarray, TimeLike]:
        """Mean and standard deviation of x_t given x_s for s <= t."""
        ratio = self.alpha(t) / self.alpha(s)
        xs = np.asarray(xs, dtype=float)
        scale = np.sqrt(ratio)
        if np.ndim(scale) and xs.ndim > 1:
            scale = scale[:, None]
        return scale * xs, np.sqrt(1 - ratio)

    def sample_xt(
        self, t: TimeLike, x0: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """Draw x_t ~ p(x_t | x_0) with noise from ``rng``."""
        mean, std = self.perturbation_params(t, x0)
        z = rng.standard_normal(mean.shape)
        return self.noised(mean, std, z)

    @staticmethod
    def noised(mean: np.ndarray, std: TimeLike, z: np.ndarray) -> np.ndarray:
        if np.ndim(std) and mean.ndim > 1:
            std = np.asarray(std)[:, None]
        return mean + std * z

    def uniform_grid(self, n: int) -> TimeGrid:
        """n points evenly spaced on [epsilon, T], endpoints exact."""
        if n < 2:
            raise ValueError(
                f"{__name__} ERROR: grid needs n >= 2 points, got {n}"
            )
        points = np.linspace(self.epsilon, self.T, n)
        points[0], points[-1] = self.epsilon, self.T
        return TimeGrid(tuple(float(p) for p in points))
