"""Score fields (x_t, t, y) -> grad log p(x_t | y) and consistency maps.

Anything the ODE solver or the samplers call goes through one of these
small adapters, so a learned network and an analytic oracle are
interchangeable.
"""
from typing import Protocol

import numpy as np

from src.diffusion_schedule.noise_schedule import NoiseSchedule
from src.score_network.heads import ScoreNet
from src.synthetic_scenes.gaussian_toy import GaussianToy


class ScoreField(Protocol):
    def __call__(self, x_t: np.ndarray, t, y: np.ndarray) -> np.ndarray:
        ...


class ConsistencyFn(Protocol):
    evaluations: int

    def evaluate(self, x_t: np.ndarray, t, y: np.ndarray) -> np.ndarray:
        ...


class NetworkScoreField:
    """Learned field backed by a ScoreNet; never records a tape."""

    def __init__(self, net: ScoreNet):
        self.net = net

    def __call__(self, x_t, t, y):
        return self.net.evaluate(x_t, t, y)


class StandardNormalField:
    """Score of N(0, I), the stationary marginal of the forward SDE."""

    def __call__(self, x_t, t, y):
        return -np.asarray(x_t, dtype=float)


class GaussianScoreField:
    def __init__(self, toy: GaussianToy, schedule: NoiseSchedule):
        self.toy = toy
        self.schedule = schedule

    def __call__(self, x_t, t, y):
        return self.toy.marginal_score(x_t, t, y, self.schedule)


class ExactConsistencyFn:
    """Ideal consistency function of the Gaussian toy.

    Maps x_t to the point its flow trajectory reaches at epsilon, and
    returns x_t unchanged for t <= epsilon.
    """

    def __init__(self, toy: GaussianToy, schedule: NoiseSchedule):
        self.toy = toy
        self.schedule = schedule
        self.evaluations = 0

    def evaluate(self, x_t, t, y):
        self.evaluations += 1
        x_t = np.atleast_2d(np.asarray(x_t, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), (x_t.shape[0],))
        eps = self.schedule.epsilon
        t_to = np.full_like(t, eps)
        mapped = self.toy.flow_map(x_t, t, t_to, y, self.schedule)
        return np.where((t <= eps)[:, None], x_t, mapped)
