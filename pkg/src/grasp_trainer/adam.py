"""Adam over a flat list of numpy parameters, updated in place."""
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


def clip_by_global_norm(grads: Sequence[np.ndarray], max_norm: float) -> float:
    """Rescale ``grads`` in place so their joint L2 norm is at most
    ``max_norm``; returns the norm before clipping."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


class Adam:
    def __init__(
        self,
        params: List[np.ndarray],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        clip_norm: Optional[float] = None,
    ):
        if lr <= 0:
            raise ValueError(
                f"{__name__} ERROR: learning rate must be positive"
            )
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: Sequence[np.ndarray]) -> float:
        """Apply one update; returns the (pre-clip) gradient norm."""
        if len(grads) != len(self.params):
            raise ValueError(
                f"{__name__} ERROR: gradient list length mismatch"
            )
        norm = clip_by_global_norm(grads, self.clip_norm or 0.0)
        self.t += 1
        bias1 = 1 - self.beta1 ** self.t
        bias2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)
        return norm

    def state_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        shapes = [p.shape for p in self.params]
        for key in ("m", "v"):
            if [np.shape(a) for a in state[key]] != shapes:
                raise ValueError(
                    f"{__name__} ERROR: optimizer state shape mismatch"
                )
        self.t = int(state["t"])
        self.m = [np.array(a, dtype=float) for a in state["m"]]
        self.v = [np.array(a, dtype=float) for a in state["v"]]
