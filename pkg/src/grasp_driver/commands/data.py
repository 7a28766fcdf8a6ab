from src.grasp_driver.utility import EXIT_OK, print_resolved, scene_config_from
from src.grasp_trainer.config import read_run_config
from src.synthetic_scenes.dataset import SplitSpec, build_dataset


def gen_data(args, app_config, logger) -> int:
    """Build a dataset; [synthdata] defaults < --config file < flags."""
    values = dict(app_config["synthdata"])
    if args.config:
        values.update(read_run_config(args.config))
    split = args.split or values.pop("split", "mixed")
    values.pop("split", None)
    scene_config = scene_config_from(values)
    print_resolved(
        "gen-data",
        {
            "seed": args.seed,
            "n": args.n,
            "split": split,
            **scene_config.to_dict(),
        },
    )
    logger.info(f"Generating {args.n} samples into {args.out}")
    dataset = build_dataset(
        args.n,
        SplitSpec(split),
        args.seed,
        args.out,
        scene_config,
        args.threads,
    )
    counts = dataset.manifest["counts"]
    print(
        f"wrote {len(dataset)} samples ({counts['seen']} seen, "
        f"{counts['unseen']} unseen) to {args.out}"
    )
    return EXIT_OK
