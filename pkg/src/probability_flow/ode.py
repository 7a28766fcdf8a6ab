"""Euler discretization of the probability-flow ODE.

    dx/dt = -1/2 gamma(t) (x + grad log p_t(x | y))

integrated backward in time, from T down to epsilon.
"""
import csv
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.diffusion_schedule.noise_schedule import NoiseSchedule, TimeGrid
from src.probability_flow.fields import ScoreField

TRAJECTORY_HEADER = ["t", "cx", "cy", "w", "h", "theta"]


@dataclass(frozen=True)
class Trajectory:
    times: Tuple[float, ...]
    states: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError(
                f"{__name__} ERROR: {len(self.times)} times but "
                f"{len(self.states)} states"
            )
        if any(b >= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError(
                f"{__name__} ERROR: trajectory times must strictly decrease"
            )

    def __len__(self) -> int:
        return len(self.times)

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    def rows(self, sample: int = 0):
        """(t, 5 coordinates) per time point, for one member of the batch."""
        for t, state in zip(self.times, self.states):
            vec = np.atleast_2d(state)[sample]
            yield [t, *(float(v) for v in vec)]

    def write_csv(self, path, sample: int = 0) -> None:
        try:
            with open(path, "w", newline="") as f_obj:
                writer = csv.writer(f_obj)
                writer.writerow(TRAJECTORY_HEADER)
                for row in self.rows(sample):
                    writer.writerow([repr(float(v)) for v in row])
        except OSError as err:
            raise OSError(f"{__name__} ERROR: cannot write {path}: {err}")


def euler_step(
    field: ScoreField,
    x: np.ndarray,
    t_from,
    t_to,
    y: np.ndarray,
    schedule: NoiseSchedule,
) -> np.ndarray:
    """One reverse-time Euler step:
    x - 1/2 gamma(t_from) (t_to - t_from) (x + field(x, t_from, y)).

    ``t_from`` and ``t_to`` may be scalars or one time per row of ``x``.
    """
    t_from = np.asarray(t_from, dtype=float)
    t_to = np.asarray(t_to, dtype=float)
    if np.any(t_to < schedule.epsilon) or np.any(t_to > t_from):
        raise ValueError(
            f"{__name__} ERROR: need epsilon <= t_to <= t_from, got "
            f"t_from={t_from}, t_to={t_to}"
        )
    x = np.asarray(x, dtype=float)
    gamma = schedule.gamma(t_from)
    factor = 0.5 * gamma * (t_to - t_from)
    if np.ndim(factor) and x.ndim > 1:
        factor = factor[:, None]
    return x - factor * (x + field(x, t_from, y))


def solve_pf_ode(
    field: ScoreField,
    x_T: np.ndarray,
    grid: TimeGrid,
    y: np.ndarray,
    schedule: NoiseSchedule,
) -> Trajectory:
    """Integrate from the last grid point down to the first, keeping every
    state."""
    points = grid.as_array()[::-1]
    x = np.asarray(x_T, dtype=float)
    states = [x]
    for t_from, t_to in zip(points, points[1:]):
        x = euler_step(field, x, t_from, t_to, y, schedule)
        states.append(x)
    return Trajectory(tuple(float(t) for t in points), tuple(states))
