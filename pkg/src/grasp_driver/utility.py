import argparse
import configparser
from logging import config
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import yaml

from src.grasp_trainer.config import ConfigError
from src.synthetic_scenes.dataset import Sample, load_dataset
from src.synthetic_scenes.scene import SceneConfig

LOG_FILE = "tsukamu.log"
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    """A request that is well formed but cannot be served, such as an
    index past the end of the dataset."""


def command_line_parser(prog_name: str, argv: Optional[Sequence[str]] = None):
    """
    Parse command line arguments for grasp_driver.

    Args:
        prog_name:  Name of the program using this command line parser
        argv:       Arguments to parse; sys.argv[1:] when None
    Return:
        A namespace containing all command line arguments. ``command``
        names the subcommand.
    Raises:
        SystemExit with code 2 on unknown or missing arguments.
    """
    parser = argparse.ArgumentParser(prog=prog_name)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    gen = sub.add_parser("gen-data", help="generate a synthetic grasp dataset")
    gen.add_argument("--out", required=True, help="dataset directory")
    gen.add_argument("--n", type=int, required=True, help="number of samples")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument(
        "--config",
        help="flat key = value file overriding [synthdata] defaults",
    )
    gen.add_argument("--split", choices=["seen", "unseen", "mixed"])
    gen.add_argument("--threads", type=int, default=1)

    train = sub.add_parser(
        "train", help="train the score and consistency networks"
    )
    source = train.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", help="dataset directory")
    source.add_argument(
        "--toy", action="store_true", help="train on the Gaussian toy task"
    )
    train.add_argument("--out", required=True, help="run directory")
    train.add_argument("--config", help="run config file (key = value)")
    train.add_argument("--seed", type=int)
    train.add_argument("--epochs", type=int)
    train.add_argument("--max-steps", type=int, dest="max_steps")
    train.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any run config key; may repeat",
    )
    train.add_argument("--resume", action="store_true")
    train.add_argument(
        "--force",
        action="store_true",
        help="resume despite a config hash mismatch",
    )

    sample = sub.add_parser(
        "sample", help="draw one grasp for a dataset prompt"
    )
    _add_checkpoint_args(sample, required=True)
    sample.add_argument("--steps", type=int, default=1, help="sampler steps P")
    sample.add_argument(
        "--sampler", choices=["consistency", "ddpm"], default="consistency"
    )
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", help="directory for sample.json")

    inspect = sub.add_parser(
        "inspect-trajectory", help="dump a denoising trajectory as CSV"
    )
    _add_checkpoint_args(inspect, required=False)
    inspect.add_argument(
        "--mode", choices=["pf-ode", "ddpm", "consistency"], default="pf-ode"
    )
    inspect.add_argument(
        "--field",
        choices=["learned", "normal"],
        default="learned",
        help="pf-ode field: the score network or the N(0, I) score",
    )
    inspect.add_argument(
        "--grid", type=int, default=2000, help="pf-ode grid size"
    )
    inspect.add_argument(
        "--steps", type=int, default=3, help="ddpm/consistency steps"
    )
    inspect.add_argument("--seed", type=int, default=0)
    inspect.add_argument(
        "--out", required=True, help="directory for trajectory.csv"
    )

    reports = (
        ("eval", "success rates"),
        ("bench", "success rates and latency"),
    )
    for name, text in reports:
        cmd = sub.add_parser(name, help=f"{text} per sampler setting")
        cmd.add_argument("--checkpoint", required=True)
        cmd.add_argument("--data", required=True)
        cmd.add_argument("--out", required=True, help="report directory")
        cmd.add_argument("--steps-list", dest="steps_list")
        cmd.add_argument("--ddpm-steps", dest="ddpm_steps")
        cmd.add_argument("--seed", type=int, default=0)
        cmd.add_argument("--threads", type=int)
        if name == "bench":
            cmd.add_argument("--trials", type=int)
            cmd.add_argument("--warmup", type=int)

    return parser.parse_args(argv)


def _add_checkpoint_args(parser, required: bool) -> None:
    parser.add_argument("--checkpoint", required=required)
    parser.add_argument("--data", required=required)
    parser.add_argument("--index", type=int, default=0)


def read_app_config(path) -> configparser.ConfigParser:
    app_config = configparser.ConfigParser()
    app_config.optionxform = str
    if not app_config.read(path):
        raise OSError(
            f"{__name__} ERROR: cannot read application config {path}"
        )
    return app_config


def set_up_logger(config_path, out_dir=None) -> None:
    """Configure logging from YAML; the file handler writes into
    ``out_dir`` or is dropped when there is none."""
    with open(config_path, "r") as f:
        log_config = yaml.safe_load(f.read())
    handlers = log_config.get("handlers", {})
    if "file" in handlers:
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            handlers["file"]["filename"] = str(Path(out_dir) / LOG_FILE)
        else:
            del handlers["file"]
            for logger_config in log_config.get("loggers", {}).values():
                logger_config["handlers"] = [
                    h for h in logger_config.get("handlers", []) if h != "file"
                ]
    config.dictConfig(log_config)


def print_resolved(command: str, values: Mapping[str, Any]) -> None:
    """Human-readable record of everything that determines the run."""
    print(f"[{command}]")
    for key, value in values.items():
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        print(f"{key} = {value}")


def parse_set_options(options: List[str]) -> Dict[str, str]:
    values = {}
    for option in options:
        key, sep, value = option.partition("=")
        if not sep or not key.strip():
            raise UsageError(
                f"{__name__} ERROR: --set expects KEY=VALUE, got {option!r}"
            )
        values[key.strip()] = value.strip()
    return values


def scene_config_from(values: Mapping[str, str]) -> SceneConfig:
    """SceneConfig from string values; unknown keys raise ConfigError."""
    known = SceneConfig().to_dict()
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown scene config key {key!r}")
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"invalid value for {key!r}: {value!r}")
        known[key] = int(number) if isinstance(known[key], int) else number
    return SceneConfig(**known)


def load_sample(data, index: int) -> Sample:
    dataset = load_dataset(data)
    if not 0 <= index < len(dataset):
        raise UsageError(
            f"{__name__} ERROR: --index {index} outside "
            f"[0, {len(dataset) - 1}]"
        )
    return dataset.samples[index]
