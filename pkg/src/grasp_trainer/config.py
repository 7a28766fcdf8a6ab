"""Training run configuration.

Run configs are flat ``key = value`` files with ``#`` comments. Keys are
exactly the TrainConfig field names. Values resolve in the order
TrainConfig defaults < application defaults < run config file < command
line.
"""
import configparser
import json
from dataclasses import asdict, dataclass, fields, replace
from hashlib import blake2b
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from src.diffusion_schedule.noise_schedule import NoiseSchedule

_SECTION = "run"
_POSITIVE = ("batch_size", "grid_N", "cond_dim", "eval_steps", "queue_size")
_NON_NEGATIVE = (
    "epochs",
    "max_steps",
    "eval_every",
    "checkpoint_every",
    "eval_samples",
    "seed",
)


class ConfigError(ValueError):
    """Unknown key or invalid value in a run configuration."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    max_steps: int = 0  # 0 means no cap
    batch_size: int = 8
    lr_score: float = 1e-4
    lr_consistency: float = 1e-4
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    clip_norm: float = 10.0
    ema_decay: float = 0.999
    grid_N: int = 2000
    gamma_min: float = 1e-4
    gamma_max: float = 2e-2
    T: float = 1000.0
    epsilon: float = 1.0
    hidden_dims: Tuple[int, ...] = (256, 256, 256, 256)
    cond_dim: int = 96
    eval_every: int = 500
    eval_samples: int = 64
    eval_steps: int = 3
    checkpoint_every: int = 1000
    holdout_fraction: float = 0.1
    queue_size: int = 4
    seed: int = 0

    def __post_init__(self):
        for name in _POSITIVE:
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        for name in _NON_NEGATIVE:
            value = getattr(self, name)
            if value < 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")
        if self.grid_N < 2:
            raise ConfigError(f"grid_N must be >= 2, got {self.grid_N}")
        for name in ("lr_score", "lr_consistency"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigError(f"{name} must be in (0, 1), got {value}")
        betas = self.adam_betas
        if len(betas) != 2 or not all(0 <= b < 1 for b in betas):
            raise ConfigError(
                f"adam_betas must be two values in [0, 1), got {betas}"
            )
        if not 0 <= self.ema_decay <= 1:
            raise ConfigError(
                f"ema_decay must be in [0, 1], got {self.ema_decay}"
            )
        fraction = self.holdout_fraction
        if not 0 <= fraction < 1:
            raise ConfigError(
                f"holdout_fraction must be in [0, 1), got {fraction}"
            )
        if not self.hidden_dims or min(self.hidden_dims) < 1:
            raise ConfigError(
                f"hidden_dims must be positive, got {self.hidden_dims}"
            )
        try:
            self.schedule()
        except ValueError as err:
            raise ConfigError(str(err))

    def schedule(self) -> NoiseSchedule:
        return NoiseSchedule(
            self.gamma_min, self.gamma_max, self.T, self.epsilon
        )

    def to_dict(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc["adam_betas"] = list(self.adam_betas)
        doc["hidden_dims"] = list(self.hidden_dims)
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "TrainConfig":
        return cls().updated(doc)

    def updated(self, values: Mapping[str, Any]) -> "TrainConfig":
        """Copy with ``values`` applied; strings are parsed by field type."""
        known = {f.name: f for f in fields(self)}
        changes = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            changes[key] = _coerce(key, getattr(self, key), value)
        return replace(self, **changes)

    def render(self) -> str:
        """The resolved configuration in run-config syntax."""
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, list):
                value = ", ".join(repr(v) for v in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines)


def _coerce(key: str, default: Any, value: Any) -> Any:
    try:
        if isinstance(default, tuple):
            items = value.split(",") if isinstance(value, str) else list(value)
            kind = type(default[0])
            return tuple(kind(str(v).strip()) for v in items)
        if isinstance(default, int):
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError(f"{value!r} is not an integer")
            return int(as_float)
        return float(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid value for {key!r}: {value!r} ({err})")


def read_run_config(path) -> Dict[str, str]:
    """Parse a flat key = value file into raw strings."""
    parser = configparser.ConfigParser(
        comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as f_obj:
            text = f_obj.read()
    except OSError as err:
        raise OSError(
            f"{__name__} ERROR: cannot read run config {path}: {err}"
        )
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as err:
        raise ConfigError(f"malformed run config {path}: {err}")
    return dict(parser[_SECTION])


def resolve_config(
    path=None,
    overrides: Optional[Mapping[str, Any]] = None,
    base: Iterable[Mapping[str, Any]] = (),
) -> TrainConfig:
    config = TrainConfig()
    for layer in base:
        config = config.updated(layer)
    if path is not None:
        config = config.updated(read_run_config(path))
    if overrides:
        config = config.updated(overrides)
    return config


def config_hash(config: TrainConfig) -> str:
    """Digest of the canonical JSON of the resolved configuration."""
    SALT = "tsukamu.cfg".encode("utf-8")
    h_cfg = blake2b(digest_size=16, salt=SALT)
    h_cfg.update(json.dumps(config.to_dict(), sort_keys=True).encode("utf-8"))
    return h_cfg.hexdigest()
