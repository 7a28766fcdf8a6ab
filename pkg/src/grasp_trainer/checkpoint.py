"""Training state and its JSON checkpoint format.

A checkpoint is one JSON document with sorted keys:

    schema_version, step, best_metric, config, config_hash,
    networks {score, consistency, ema}, optimizer {score, consistency},
    rng

Floats are written with Python's shortest round-trip repr, so a
save -> load -> save cycle reproduces the file byte for byte. Files are
written to a temporary sibling and renamed into place.
"""
import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from src.grasp_trainer.adam import Adam
from src.grasp_trainer.config import ConfigError, TrainConfig, config_hash
from src.score_network.heads import (
    ConsistencyNet,
    EmaCopy,
    ScoreNet,
    build_consistency_net,
    build_score_net,
)
from src.score_network.serialization import (
    params_from_lists,
    params_to_lists,
    trunk_from_dict,
    trunk_to_dict,
)

SCHEMA_VERSION = 1

logger = logging.getLogger("CHECKPOINT")


class CheckpointError(Exception):
    """Base class of checkpoint loading failures."""


class CheckpointCorruptError(CheckpointError):
    """Missing, truncated or unparsable checkpoint file."""


class SchemaVersionError(CheckpointError):
    pass


class ShapeMismatchError(CheckpointError):
    pass


class ConfigHashMismatchError(CheckpointError):
    pass


@dataclass
class TrainState:
    config: TrainConfig
    step: int
    score_net: ScoreNet
    consistency_net: ConsistencyNet
    ema: EmaCopy
    opt_score: Adam
    opt_consistency: Adam
    rng: np.random.Generator
    best_metric: Optional[float] = None

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def sampling_net(self) -> ConsistencyNet:
        """A consistency network carrying the EMA parameters."""
        c = self.config
        net = build_consistency_net(c.cond_dim, c.T, c.epsilon, c.hidden_dims)
        net.trunk.set_params(self.ema.params)
        return net

    def param_norm(self) -> float:
        return float(
            np.sqrt(
                self.score_net.trunk.param_norm() ** 2
                + self.consistency_net.trunk.param_norm() ** 2
            )
        )

    def all_finite(self) -> bool:
        arrays = [
            *self.score_net.params,
            *self.consistency_net.params,
            *self.ema.params,
        ]
        return all(np.all(np.isfinite(a)) for a in arrays)


def make_optimizers(config: TrainConfig, score_net, consistency_net):
    beta1, beta2 = config.adam_betas
    opt_score = Adam(
        score_net.params,
        config.lr_score,
        beta1,
        beta2,
        config.adam_eps,
        config.clip_norm,
    )
    opt_consistency = Adam(
        consistency_net.params,
        config.lr_consistency,
        beta1,
        beta2,
        config.adam_eps,
        config.clip_norm,
    )
    return opt_score, opt_consistency


def init_state(config: TrainConfig) -> TrainState:
    """Fresh networks from ``config.seed``; the EMA target starts as a copy
    of the consistency network."""
    init_rng = np.random.default_rng([config.seed, 0])
    score_net = build_score_net(
        config.cond_dim, config.T, config.hidden_dims, init_rng
    )
    consistency_net = build_consistency_net(
        config.cond_dim, config.T, config.epsilon, config.hidden_dims, init_rng
    )
    opt_score, opt_consistency = make_optimizers(
        config, score_net, consistency_net
    )
    return TrainState(
        config,
        0,
        score_net,
        consistency_net,
        EmaCopy.of(consistency_net, config.ema_decay),
        opt_score,
        opt_consistency,
        np.random.default_rng([config.seed, 1]),
    )


def _adam_to_dict(opt: Adam) -> Dict[str, Any]:
    return {
        "t": opt.t,
        "m": params_to_lists(opt.m),
        "v": params_to_lists(opt.v),
    }


def state_to_dict(state: TrainState) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "step": state.step,
        "best_metric": state.best_metric,
        "config": state.config.to_dict(),
        "config_hash": state.config_hash,
        "networks": {
            "score": trunk_to_dict(state.score_net.trunk),
            "consistency": trunk_to_dict(state.consistency_net.trunk),
            "ema": params_to_lists(state.ema.params),
        },
        "optimizer": {
            "score": _adam_to_dict(state.opt_score),
            "consistency": _adam_to_dict(state.opt_consistency),
        },
        "rng": state.rng.bit_generator.state,
    }


def encode_state(state: TrainState) -> bytes:
    if not state.all_finite():
        raise ValueError(
            f"{__name__} ERROR: refusing to persist non-finite parameters"
        )
    text = json.dumps(state_to_dict(state), sort_keys=True)
    return (text + "\n").encode("utf-8")


def save_checkpoint(state: TrainState, path) -> Path:
    path = Path(path)
    data = encode_state(state)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=path.parent, prefix=f".{path.name}."
        )
        try:
            with os.fdopen(fd, "wb") as f_obj:
                f_obj.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as err:
        raise OSError(
            f"{__name__} ERROR: cannot write checkpoint {path}: {err}"
        )
    logger.debug(f"Saved checkpoint at step {state.step} to {path}")
    return path


def _load_adam(doc: Dict[str, Any], opt: Adam) -> None:
    shapes = [p.shape for p in opt.params]
    opt.load_state_dict(
        {
            "t": doc["t"],
            "m": params_from_lists(doc["m"], shapes),
            "v": params_from_lists(doc["v"], shapes),
        }
    )


def state_from_dict(
    doc: Dict[str, Any],
    expected_hash: Optional[str] = None,
    force: bool = False,
) -> TrainState:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{__name__} ERROR: checkpoint schema {version}, "
            f"expected {SCHEMA_VERSION}"
        )
    try:
        config = TrainConfig.from_dict(doc["config"])
    except ConfigError as err:
        raise CheckpointCorruptError(
            f"{__name__} ERROR: bad stored config: {err}"
        )
    stored_hash = doc["config_hash"]
    if stored_hash != config_hash(config):
        raise CheckpointCorruptError(
            f"{__name__} ERROR: stored config hash does not match the "
            "stored config"
        )
    mismatch = expected_hash is not None and stored_hash != expected_hash
    if mismatch and not force:
        raise ConfigHashMismatchError(
            f"{__name__} ERROR: checkpoint config hash {stored_hash} does not "
            f"match {expected_hash}"
        )

    state = init_state(config)
    try:
        nets = doc["networks"]
        heads = (
            (state.score_net, "score"),
            (state.consistency_net, "consistency"),
        )
        for head, key in heads:
            trunk = trunk_from_dict(nets[key])
            if trunk.layer_dims != head.trunk.layer_dims:
                raise ValueError(
                    f"{key} network dims {trunk.layer_dims} do not match the "
                    f"config ({head.trunk.layer_dims})"
                )
            head.trunk.set_params(trunk.params)
        ema = params_from_lists(
            nets["ema"], state.consistency_net.trunk.shapes()
        )
        state.ema = EmaCopy(tuple(ema), config.ema_decay)
        state.opt_score, state.opt_consistency = make_optimizers(
            config, state.score_net, state.consistency_net
        )
        _load_adam(doc["optimizer"]["score"], state.opt_score)
        _load_adam(doc["optimizer"]["consistency"], state.opt_consistency)
    except ValueError as err:
        raise ShapeMismatchError(f"{__name__} ERROR: {err}")
    state.rng.bit_generator.state = doc["rng"]
    state.step = int(doc["step"])
    state.best_metric = doc["best_metric"]
    return state


def load_checkpoint(
    path, expected_hash: Optional[str] = None, force: bool = False
) -> TrainState:
    """Read a checkpoint; raises a CheckpointError subclass on any failure."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise CheckpointCorruptError(
            f"{__name__} ERROR: cannot read {path}: {err}"
        )
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise CheckpointCorruptError(
            f"{__name__} ERROR: {path} is not valid JSON: {err}"
        )
    if not isinstance(doc, dict):
        raise CheckpointCorruptError(
            f"{__name__} ERROR: {path} is not a checkpoint"
        )
    try:
        return state_from_dict(doc, expected_hash, force)
    except (KeyError, TypeError) as err:
        raise CheckpointCorruptError(
            f"{__name__} ERROR: {path} is missing {err}"
        )


def file_digest(path) -> str:
    """Digest of a file's bytes, for provenance checks."""
    return hashlib.blake2b(Path(path).read_bytes(), digest_size=16).hexdigest()
