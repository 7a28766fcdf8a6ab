"""One-prompt sampling and trajectory dumps."""
import json
from pathlib import Path

import numpy as np

from src.grasp_driver.utility import (
    EXIT_OK,
    UsageError,
    load_sample,
    print_resolved,
)
from src.grasp_geometry.rectangle import decode_pose, is_success
from src.grasp_trainer.checkpoint import load_checkpoint
from src.grasp_trainer.config import TrainConfig
from src.probability_flow.fields import NetworkScoreField, StandardNormalField
from src.probability_flow.ode import solve_pf_ode
from src.probability_flow.samplers import (
    sample_consistency,
    sample_ddpm_baseline,
)
from src.score_network.heads import POSE_DIM

TRAJECTORY_FILE = "trajectory.csv"
SAMPLE_FILE = "sample.json"


def sample(args, app_config, logger) -> int:
    if args.steps < 1:
        raise UsageError(f"--steps must be >= 1, got {args.steps}")
    state = load_checkpoint(args.checkpoint)
    item = load_sample(args.data, args.index)
    print_resolved(
        "sample",
        {
            "checkpoint": args.checkpoint,
            "config_hash": state.config_hash,
            "index": args.index,
            "sampler": args.sampler,
            "steps": args.steps,
            "seed": args.seed,
        },
    )
    rng = np.random.default_rng([args.seed, item.index])
    y = np.asarray(item.condition, dtype=float)[None, :]
    schedule = state.config.schedule()
    if args.sampler == "consistency":
        net = state.sampling_net()
        result = sample_consistency(net, y, args.steps, schedule, rng)
        calls = net.evaluations
    else:
        before = state.score_net.evaluations
        field = NetworkScoreField(state.score_net)
        result = sample_ddpm_baseline(field, y, args.steps, schedule, rng)
        calls = state.score_net.evaluations - before

    pose = decode_pose(result.x0[0], item.scene.extent)
    success = is_success(pose, item.gt_grasps)
    print(f"prompt: {item.prompt.text}")
    named = zip(("cx", "cy", "w", "h", "theta"), pose.as_tuple())
    print("grasp: " + " ".join(f"{name}={value:.6f}" for name, value in named))
    print(f"model calls: {calls}")
    print(f"success: {'yes' if success else 'no'}")

    if args.out:
        path = Path(args.out) / SAMPLE_FILE
        doc = {
            "index": item.index,
            "prompt": item.prompt.text,
            "sampler": args.sampler,
            "steps": args.steps,
            "seed": args.seed,
            "config_hash": state.config_hash,
            "pose": list(pose.as_tuple()),
            "vector": [float(v) for v in result.x0[0]],
            "model_calls": calls,
            "success": success,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        logger.info(f"Wrote {path}")
    return EXIT_OK


def inspect_trajectory(args, app_config, logger) -> int:
    analytic = args.mode == "pf-ode" and args.field == "normal"
    if not analytic and not (args.checkpoint and args.data):
        raise UsageError(f"--mode {args.mode} needs --checkpoint and --data")

    state = load_checkpoint(args.checkpoint) if args.checkpoint else None
    if state is not None:
        schedule = state.config.schedule()
    else:
        defaults = TrainConfig().updated(dict(app_config["schedule"]))
        schedule = defaults.schedule()
    if args.data:
        item = load_sample(args.data, args.index)
        y = np.asarray(item.condition, dtype=float)[None, :]
        index = item.index
    else:
        y, index = np.zeros((1, 1)), args.index
    print_resolved(
        "inspect-trajectory",
        {
            "mode": args.mode,
            "field": args.field,
            "grid": args.grid,
            "steps": args.steps,
            "index": args.index,
            "seed": args.seed,
            **({"config_hash": state.config_hash} if state else {}),
        },
    )

    rng = np.random.default_rng([args.seed, index])
    if args.mode == "pf-ode":
        if analytic:
            field = StandardNormalField()
        else:
            field = NetworkScoreField(state.score_net)
        x_T = rng.standard_normal((1, POSE_DIM))
        grid = schedule.uniform_grid(args.grid)
        trajectory = solve_pf_ode(field, x_T, grid, y, schedule)
    elif args.mode == "ddpm":
        trajectory = sample_ddpm_baseline(
            NetworkScoreField(state.score_net),
            y,
            args.steps,
            schedule,
            rng,
            keep_trajectory=True,
        ).estimates
    else:
        trajectory = sample_consistency(
            state.sampling_net(),
            y,
            args.steps,
            schedule,
            rng,
            keep_estimates=True,
        ).estimates

    path = Path(args.out) / TRAJECTORY_FILE
    trajectory.write_csv(path)
    last = np.atleast_2d(trajectory.terminal)[0]
    terminal = " ".join(f"{v:.6f}" for v in last)
    print(f"wrote {len(trajectory)} rows to {path}")
    print(f"terminal state: {terminal}")
    return EXIT_OK
