import logging
import sys
from pathlib import Path

from src.grasp_driver.commands.data import gen_data
from src.grasp_driver.commands.evaluate import bench_command, eval_command
from src.grasp_driver.commands.sample import inspect_trajectory, sample
from src.grasp_driver.commands.train import train
from src.grasp_driver.utility import (
    EXIT_FAILURE,
    EXIT_USAGE,
    command_line_parser,
    read_app_config,
    set_up_logger,
)
from src.grasp_trainer.checkpoint import CheckpointError

ROOT = Path(__file__).resolve().parent
COMMANDS = {
    "gen-data": gen_data,
    "train": train,
    "sample": sample,
    "inspect-trajectory": inspect_trajectory,
    "eval": eval_command,
    "bench": bench_command,
}


def main(argv=None) -> int:
    # parse command line argument
    args = command_line_parser("GRASP_DRIVER", argv)

    # set up logger, writing its file only under --out
    set_up_logger(ROOT / "logger_config.yaml", args.out)
    logger = logging.getLogger("GRASP_DRIVER")

    try:
        app_config = read_app_config(ROOT / "app_config.ini")
        status = COMMANDS[args.command](args, app_config, logger)
    except ValueError as err:
        logger.error(f"{args.command} rejected: {err}")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (CheckpointError, OSError, RuntimeError) as err:
        logger.error(f"{args.command} failed: {err}")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.info(f"{args.command} interrupted")
        return EXIT_FAILURE
    logger.info(f"\n******* grasp_driver {args.command} ends *******\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
