import numpy as np

from src.grasp_driver.utility import EXIT_OK, parse_set_options, print_resolved
from src.grasp_trainer.config import TrainConfig, config_hash, resolve_config
from src.grasp_trainer.trainer import fit, fit_dataset
from src.synthetic_scenes.dataset import load_dataset
from src.synthetic_scenes.gaussian_toy import GaussianToy


def _show(config: TrainConfig, source: str) -> None:
    print_resolved(
        "train",
        {
            "source": source,
            **config.to_dict(),
            "config_hash": config_hash(config),
        },
    )


def train(args, app_config, logger) -> int:
    overrides = {
        "seed": args.seed,
        "epochs": args.epochs,
        "max_steps": args.max_steps,
        **parse_set_options(args.set),
    }
    base = [dict(app_config["schedule"]), dict(app_config["network"])]
    config = resolve_config(args.config, overrides, base)

    if args.toy:
        toy_section = app_config["toy"]
        toy = GaussianToy.random(
            int(toy_section["k"]),
            np.random.default_rng([config.seed, 7]),
            sigma=float(toy_section["sigma"]),
        )
        x0, y, _ = toy.sample(
            int(toy_section["n"]), np.random.default_rng([config.seed, 8])
        )
        config = config.updated({"cond_dim": toy.cond_dim})
        _show(config, "gaussian-toy")
        result = fit(
            config, x0, y, args.out, None, args.resume, args.force, True
        )
    else:
        dataset = load_dataset(args.data)
        cond_dim = len(dataset.samples[0].condition)
        config = config.updated({"cond_dim": cond_dim})
        _show(config, args.data)
        result = fit_dataset(
            config, dataset.samples, args.out, args.resume, args.force, True
        )

    logger.info(f"Training log at {result.log_path}")
    print(f"finished at step {result.state.step}")
    print(f"last checkpoint: {result.last_path}")
    print(f"best checkpoint: {result.best_path}")
    return EXIT_OK
