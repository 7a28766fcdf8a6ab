"""Score network s_phi, consistency network f_theta and its EMA target.

Both heads share one trunk shape: the MLP reads
``concat(x_t, time_features(t), y)`` and returns a 5-vector.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.score_network.mlp import Gradients, MlpNet

POSE_DIM = 5
N_FREQUENCIES = 8
TIME_DIM = 2 * N_FREQUENCIES
DEFAULT_HIDDEN = (256, 256, 256, 256)


def time_features(t, T: float) -> np.ndarray:
    """Sinusoidal features of t/T, interleaved [sin_k, cos_k] for k=0..7.

    Returns shape (16,) for scalar t, (B, 16) for a vector of times.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(arr > T):
        raise ValueError(f"{__name__} ERROR: time outside [0, {T}]: {t}")
    freqs = 2 * math.pi * 2.0 ** np.arange(N_FREQUENCIES)
    angles = arr[..., None] * freqs / T
    feats = np.empty(arr.shape + (TIME_DIM,))
    feats[..., 0::2] = np.sin(angles)
    feats[..., 1::2] = np.cos(angles)
    return feats


def trunk_dims(cond_dim: int, hidden: Sequence[int] = DEFAULT_HIDDEN):
    return [POSE_DIM + TIME_DIM + cond_dim, *hidden, POSE_DIM]


class _ConditionedHead:
    """Input assembly and bookkeeping shared by both heads."""

    def __init__(self, trunk: MlpNet, T: float, cond_dim: int):
        if trunk.in_dim != POSE_DIM + TIME_DIM + cond_dim:
            raise ValueError(
                f"{__name__} ERROR: trunk input {trunk.in_dim} does not match "
                f"cond_dim {cond_dim}"
            )
        if trunk.out_dim != POSE_DIM:
            raise ValueError(
                f"{__name__} ERROR: trunk output must be {POSE_DIM}-d"
            )
        self.trunk = trunk
        self.T = float(T)
        self.cond_dim = int(cond_dim)
        self.evaluations = 0

    def _inputs(self, x_t, t, y):
        x_t = np.atleast_2d(np.asarray(x_t, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if x_t.shape[1] != POSE_DIM:
            raise ValueError(
                f"{__name__} ERROR: state must be {POSE_DIM}-d, "
                f"got {x_t.shape[1]}"
            )
        if y.shape[1] != self.cond_dim:
            raise ValueError(
                f"{__name__} ERROR: condition must be {self.cond_dim}-d, "
                f"got {y.shape[1]}"
            )
        batch = x_t.shape[0]
        if y.shape[0] == 1 and batch > 1:
            y = np.repeat(y, batch, axis=0)
        t = np.broadcast_to(np.asarray(t, dtype=float), (batch,))
        if y.shape[0] != batch:
            raise ValueError(
                f"{__name__} ERROR: batch mismatch between state and condition"
            )
        feats = time_features(t, self.T)
        return x_t, t, np.concatenate([x_t, feats, y], axis=1)

    def zero_grad(self) -> None:
        self.trunk.zero_grad()

    @property
    def params(self) -> List[np.ndarray]:
        return self.trunk.params

    @property
    def grads(self) -> List[np.ndarray]:
        return self.trunk.grads


class ScoreNet(_ConditionedHead):
    """s_phi(x_t, t, y): approximates grad log p(x_t | y)."""

    def forward(self, x_t, t, y) -> np.ndarray:
        self.evaluations += 1
        _, _, inputs = self._inputs(x_t, t, y)
        return self.trunk.forward(inputs)

    def evaluate(self, x_t, t, y) -> np.ndarray:
        self.evaluations += 1
        _, _, inputs = self._inputs(x_t, t, y)
        return self.trunk.evaluate(inputs)

    def backward(self, upstream: np.ndarray) -> Gradients:
        return self.trunk.backward(upstream)


class ConsistencyNet(_ConditionedHead):
    """f_theta(x_t, t, y): x_t itself for t <= epsilon, else the trunk."""

    def __init__(self, trunk: MlpNet, T: float, cond_dim: int, epsilon: float):
        super().__init__(trunk, T, cond_dim)
        self.epsilon = float(epsilon)
        self._boundary = None

    def _clamp(self, x_t, t, out):
        boundary = t <= self.epsilon
        return boundary, np.where(boundary[:, None], x_t, out)

    def forward(self, x_t, t, y) -> np.ndarray:
        self.evaluations += 1
        x_t, t, inputs = self._inputs(x_t, t, y)
        self._boundary, out = self._clamp(x_t, t, self.trunk.forward(inputs))
        return out

    def evaluate(self, x_t, t, y, params: Optional[Sequence] = None):
        self.evaluations += 1
        x_t, t, inputs = self._inputs(x_t, t, y)
        return self._clamp(x_t, t, self.trunk.evaluate(inputs, params))[1]

    def backward(self, upstream: np.ndarray) -> Gradients:
        upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
        if self._boundary is not None:
            upstream = np.where(self._boundary[:, None], 0.0, upstream)
            self._boundary = None
        return self.trunk.backward(upstream)


@dataclass(frozen=True)
class EmaCopy:
    """Frozen parameter snapshot of a ConsistencyNet (the target f_theta*)."""

    params: tuple
    decay: float

    @classmethod
    def of(cls, online: ConsistencyNet, decay: float) -> "EmaCopy":
        if not 0 <= decay <= 1:
            raise ValueError(f"{__name__} ERROR: EMA decay must be in [0, 1]")
        return cls(tuple(p.copy() for p in online.params), float(decay))

    def evaluate(self, online: ConsistencyNet, x_t, t, y) -> np.ndarray:
        """Evaluate the target through ``online``'s architecture."""
        return online.evaluate(x_t, t, y, params=self.params)


def ema_update(target: EmaCopy, online: ConsistencyNet) -> EmaCopy:
    if [p.shape for p in target.params] != [p.shape for p in online.params]:
        raise ValueError(f"{__name__} ERROR: EMA shape mismatch")
    d = target.decay
    pairs = zip(target.params, online.params)
    return EmaCopy(tuple(d * p + (1 - d) * q for p, q in pairs), d)


def build_score_net(
    cond_dim: int,
    T: float,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    rng: Optional[np.random.Generator] = None,
) -> ScoreNet:
    return ScoreNet(MlpNet(trunk_dims(cond_dim, hidden), rng), T, cond_dim)


def build_consistency_net(
    cond_dim: int,
    T: float,
    epsilon: float,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    rng: Optional[np.random.Generator] = None,
) -> ConsistencyNet:
    trunk = MlpNet(trunk_dims(cond_dim, hidden), rng)
    return ConsistencyNet(trunk, T, cond_dim, epsilon)
