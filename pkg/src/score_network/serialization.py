"""JSON-ready dictionaries for network parameters.

Arrays are flattened row-major into plain float lists; Python's float repr
round-trips exactly, so encode -> decode -> encode is byte-stable.
"""
from typing import Any, Dict, List, Sequence

import numpy as np

from src.score_network.mlp import MlpNet


def params_to_lists(params: Sequence[np.ndarray]) -> List[List[float]]:
    return [np.asarray(p, dtype=float).ravel().tolist() for p in params]


def params_from_lists(
    flat: Sequence[Sequence[float]], shapes: Sequence[tuple]
) -> List[np.ndarray]:
    if len(flat) != len(shapes):
        raise ValueError(
            f"{__name__} ERROR: expected {len(shapes)} arrays, got {len(flat)}"
        )
    arrays = []
    for values, shape in zip(flat, shapes):
        if len(values) != int(np.prod(shape)):
            raise ValueError(
                f"{__name__} ERROR: array of {len(values)} values does not "
                f"fit shape {tuple(shape)}"
            )
        arrays.append(np.array(values, dtype=float).reshape(shape))
    return arrays


def trunk_to_dict(trunk: MlpNet) -> Dict[str, Any]:
    return {
        "layer_dims": list(trunk.layer_dims),
        "activation": trunk.activation,
        "params": params_to_lists(trunk.params),
    }


def trunk_from_dict(doc: Dict[str, Any]) -> MlpNet:
    trunk = MlpNet(doc["layer_dims"], activation=doc["activation"])
    trunk.set_params(params_from_lists(doc["params"], trunk.shapes()))
    return trunk
