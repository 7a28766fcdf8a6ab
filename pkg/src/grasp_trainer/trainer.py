"""Joint training of the score network and the consistency network.

Each step updates phi from the score loss and theta from the consistency
plus detection losses with two Adam optimizers, then moves the EMA
target theta* toward theta.
"""
import csv
import logging
import time
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.diffusion_schedule.noise_schedule import NoiseSchedule, TimeGrid
from src.grasp_evalbench.evaluate import holdout_success_rate
from src.grasp_trainer.checkpoint import (
    TrainState,
    init_state,
    load_checkpoint,
    save_checkpoint,
)
from src.grasp_trainer.config import TrainConfig, config_hash
from src.grasp_trainer.loader import BatchLoader, clean_up, steps_per_epoch
from src.score_network.heads import ema_update
from src.synthetic_scenes.dataset import Sample, training_arrays
from src.training_objectives.losses import Batch, LossBreakdown, total_loss

LOG_FILE = "train_log.csv"
LOG_HEADER = ["step", "score", "consistency", "detection", "total", "wall_ms"]
BEST_CHECKPOINT = "best.json"
LAST_CHECKPOINT = "last.json"

logger = logging.getLogger("TRAINER")

Evaluator = Callable[[TrainState], float]


class NonFiniteError(RuntimeError):
    """A loss or parameter became NaN or infinite; carries a snapshot."""

    def __init__(self, message: str, snapshot: dict):
        super().__init__(f"{message}: {snapshot}")
        self.snapshot = snapshot


@dataclass(frozen=True)
class FitResult:
    state: TrainState
    log_path: Path
    last_path: Path
    best_path: Path


@lru_cache(maxsize=8)
def _grid(schedule: NoiseSchedule, n: int) -> TimeGrid:
    return schedule.uniform_grid(n)


def _snapshot(state: TrainState, losses: Optional[LossBreakdown]) -> dict:
    return {
        "step": state.step,
        "losses": None if losses is None else losses.as_row(),
        "param_norm": state.param_norm(),
    }


def train_step(
    state: TrainState, batch: Batch
) -> Tuple[TrainState, LossBreakdown]:
    """One optimizer step for both networks plus the EMA update."""
    config = state.config
    schedule = config.schedule()
    s_net, f = state.score_net, state.consistency_net
    s_net.zero_grad()
    f.zero_grad()
    grid = _grid(schedule, config.grid_N)
    losses = total_loss(
        f, state.ema, s_net, grid, batch, schedule, state.rng
    )
    if not losses.is_finite():
        raise NonFiniteError("non-finite loss", _snapshot(state, losses))
    state.opt_score.step(s_net.grads)
    state.opt_consistency.step(f.grads)
    state.ema = ema_update(state.ema, f)
    state.step += 1
    if not state.all_finite():
        raise NonFiniteError("non-finite parameters", _snapshot(state, losses))
    return state, losses


def total_steps(config: TrainConfig, n_rows: int) -> int:
    steps = config.epochs * steps_per_epoch(n_rows, config.batch_size)
    return min(steps, config.max_steps) if config.max_steps else steps


def _due(step: int, every: int) -> bool:
    return bool(every) and step % every == 0


def _prepare_log(path: Path, resume_step: Optional[int]) -> None:
    """Fresh header, or on resume the rows up to the resume step."""
    rows: List[List[str]] = []
    if resume_step is not None and path.exists():
        with path.open("r", newline="") as f_obj:
            body = list(csv.reader(f_obj))[1:]
        rows = [r for r in body if int(r[0]) <= resume_step]
    with path.open("w", newline="") as f_obj:
        writer = csv.writer(f_obj)
        writer.writerow(LOG_HEADER)
        writer.writerows(rows)


def fit(
    config: TrainConfig,
    x0: np.ndarray,
    y: np.ndarray,
    out_dir,
    evaluator: Optional[Evaluator] = None,
    resume: bool = False,
    force: bool = False,
    progress: bool = False,
) -> FitResult:
    """Train on the rows (x0, y), writing the log and checkpoints to out_dir.

    With ``resume`` the run continues from ``out_dir/last.json``; the
    result is identical to an uninterrupted run.
    """
    if len(x0) == 0:
        raise ValueError(f"{__name__} ERROR: empty training set")
    if y.shape[1] != config.cond_dim:
        logger.info(f"Condition dimension taken from data: {y.shape[1]}")
        config = replace(config, cond_dim=int(y.shape[1]))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / LOG_FILE
    last_path, best_path = out_dir / LAST_CHECKPOINT, out_dir / BEST_CHECKPOINT
    n_steps = total_steps(config, len(x0))

    if resume:
        state = load_checkpoint(
            last_path, expected_hash=config_hash(config), force=force
        )
        logger.info(f"Resuming from step {state.step} of {n_steps}")
        _prepare_log(log_path, state.step)
    else:
        state = init_state(config)
        _prepare_log(log_path, None)
        save_checkpoint(state, last_path)
    evaluated = best_path.exists() and resume

    loader = None
    try:
        loader = BatchLoader(
            x0,
            y,
            config.batch_size,
            config.seed,
            state.step,
            n_steps,
            config.queue_size,
        ).start()
        with log_path.open("a", newline="") as f_obj:
            writer = csv.writer(f_obj)
            bar = tqdm(
                total=n_steps,
                initial=state.step,
                disable=not progress,
                desc="train",
            )
            for _, batch in loader:
                start = time.perf_counter()
                _, losses = train_step(state, batch)
                wall_ms = 1000 * (time.perf_counter() - start)
                losses_text = [repr(v) for v in losses.as_row()]
                writer.writerow([state.step, *losses_text, f"{wall_ms:.3f}"])
                bar.update(1)
                if evaluator and _due(state.step, config.eval_every):
                    metric = float(evaluator(state))
                    logger.info(f"Step {state.step}: eval metric {metric:.4f}")
                    evaluated = True
                    if state.best_metric is None or metric > state.best_metric:
                        state.best_metric = metric
                        save_checkpoint(state, best_path)
                if _due(state.step, config.checkpoint_every):
                    f_obj.flush()
                    save_checkpoint(state, last_path)
            bar.close()
    finally:
        clean_up(logger, [loader])

    save_checkpoint(state, last_path)
    if not evaluated:
        save_checkpoint(state, best_path)
    logger.info(
        f"Training finished at step {state.step}; checkpoints in {out_dir}"
    )
    return FitResult(state, log_path, last_path, best_path)


def split_holdout(
    samples: Sequence[Sample], fraction: float, seed: int
) -> Tuple[List[Sample], List[Sample]]:
    """Seeded (training, held-out) split; training is never empty."""
    n = len(samples)
    n_hold = min(int(round(fraction * n)), n - 1)
    order = np.random.default_rng([seed, 2]).permutation(n)
    hold = set(order[:n_hold].tolist())
    train = [s for i, s in enumerate(samples) if i not in hold]
    held = [s for i, s in enumerate(samples) if i in hold]
    return train, held


def fit_dataset(
    config: TrainConfig,
    samples: Sequence[Sample],
    out_dir,
    resume: bool = False,
    force: bool = False,
    progress: bool = False,
) -> FitResult:
    """Train on the seen samples of a grasp dataset, evaluating the
    success rate on a held-out slice."""
    seen = [s for s in samples if s.split_tag == "seen"]
    if not seen:
        raise ValueError(f"{__name__} ERROR: dataset has no seen samples")
    train, held = split_holdout(seen, config.holdout_fraction, config.seed)
    x0, y = training_arrays(train)
    logger.info(
        f"Training on {len(train)} samples ({len(x0)} grasps), "
        f"{len(held)} held out"
    )
    evaluator = None
    if held and config.eval_samples:
        held_view = held[: config.eval_samples]

        def evaluator(state: TrainState) -> float:
            return holdout_success_rate(
                state, held_view, state.config.eval_steps
            )

    return fit(config, x0, y, out_dir, evaluator, resume, force, progress)
