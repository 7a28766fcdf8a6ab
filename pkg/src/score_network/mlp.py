"""Multi-layer perceptron with a hand-written reverse pass.

Rows are samples: a layer computes ``a @ W + b`` with ``W`` of shape
(fan_in, fan_out). Hidden layers use the tanh form of GELU; the output
layer is linear.
"""
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

GELU_C = math.sqrt(2 / math.pi)
GELU_K = 0.044715
ACTIVATIONS = ("gelu",)


class TapeError(RuntimeError):
    """Raised when backward is called without a recorded forward pass."""


class Gradients(NamedTuple):
    params: List[np.ndarray]
    inputs: np.ndarray


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1 + np.tanh(GELU_C * (x + GELU_K * x ** 3)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    u = np.tanh(GELU_C * (x + GELU_K * x ** 3))
    du = GELU_C * (1 + 3 * GELU_K * x ** 2)
    return 0.5 * (1 + u) + 0.5 * x * (1 - u ** 2) * du


class MlpNet:
    """Fully connected network whose parameters live in a flat list.

    ``params`` alternates weights and biases: [W0, b0, W1, b1, ...]. The
    list order is the canonical order used by the optimizer, the EMA copy
    and checkpoints.
    """

    def __init__(
        self,
        layer_dims: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        activation: str = "gelu",
        zero_last: bool = True,
    ):
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ValueError(
                f"{__name__} ERROR: invalid layer dims {list(layer_dims)}"
            )
        if activation not in ACTIVATIONS:
            raise ValueError(
                f"{__name__} ERROR: unknown activation {activation!r}"
            )
        self.layer_dims = [int(d) for d in layer_dims]
        self.activation = activation
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params: List[np.ndarray] = []
        n_layers = len(self.layer_dims) - 1
        for i, (fan_in, fan_out) in enumerate(
            zip(self.layer_dims, self.layer_dims[1:])
        ):
            if zero_last and i == n_layers - 1:
                w = np.zeros((fan_in, fan_out))
            else:
                bound = 1 / math.sqrt(fan_in)
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.params.extend([w, np.zeros(fan_out)])
        self.grads = [np.zeros_like(p) for p in self.params]
        self._tape = None

    @property
    def in_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def out_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_layers(self) -> int:
        return len(self.layer_dims) - 1

    def shapes(self) -> List[tuple]:
        return [p.shape for p in self.params]

    def zero_grad(self) -> None:
        for g in self.grads:
            g.fill(0.0)

    def set_params(self, params: Sequence[np.ndarray]) -> None:
        if [np.shape(p) for p in params] != self.shapes():
            raise ValueError(f"{__name__} ERROR: parameter shape mismatch")
        self.params = [np.array(p, dtype=float) for p in params]

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.in_dim:
            raise ValueError(
                f"{__name__} ERROR: expected input width {self.in_dim}, "
                f"got {x.shape[1]}"
            )
        return x

    def evaluate(
        self, x: np.ndarray, params: Optional[Sequence[np.ndarray]] = None
    ) -> np.ndarray:
        """Forward pass without recording; ``params`` overrides the weights."""
        params = self.params if params is None else params
        a = self._check_input(x)
        for i in range(self.n_layers):
            z = a @ params[2 * i] + params[2 * i + 1]
            a = gelu(z) if i < self.n_layers - 1 else z
        return a

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Forward pass that records the activations for ``backward``."""
        a = self._check_input(x)
        inputs, pre = [], []
        for i in range(self.n_layers):
            inputs.append(a)
            z = a @ self.params[2 * i] + self.params[2 * i + 1]
            pre.append(z)
            a = gelu(z) if i < self.n_layers - 1 else z
        self._tape = (inputs, pre)
        return a

    def backward(self, upstream: np.ndarray) -> Gradients:
        """Accumulate parameter gradients of ``sum(upstream * output)``.

        Consumes the tape of the last ``forward``.
        """
        if self._tape is None:
            raise TapeError(f"{__name__} ERROR: backward without forward")
        inputs, pre = self._tape
        self._tape = None
        delta = np.atleast_2d(np.asarray(upstream, dtype=float))
        for i in reversed(range(self.n_layers)):
            if i < self.n_layers - 1:
                delta = delta * gelu_grad(pre[i])
            self.grads[2 * i] += inputs[i].T @ delta
            self.grads[2 * i + 1] += delta.sum(axis=0)
            delta = delta @ self.params[2 * i].T
        return Gradients(self.grads, delta)

    def param_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(p * p)) for p in self.params))
