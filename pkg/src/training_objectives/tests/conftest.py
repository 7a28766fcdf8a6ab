import numpy as np
import pytest

from src.diffusion_schedule.noise_schedule import NoiseSchedule
from src.score_network.heads import build_consistency_net, build_score_net

COND_DIM = 2


def randomize(head, rng, scale=0.3):
    head.trunk.set_params(
        [rng.normal(0, scale, size=p.shape) for p in head.trunk.params]
    )
    return head


@pytest.fixture(scope="package")
def schedule():
    return NoiseSchedule()


@pytest.fixture(scope="package")
def grid(schedule):
    return schedule.uniform_grid(21)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def nets(rng, schedule):
    """Randomized (score net, consistency net) pair with small trunks."""
    s_net = build_score_net(COND_DIM, schedule.T, hidden=(6, 6), rng=rng)
    f = build_consistency_net(
        COND_DIM, schedule.T, schedule.epsilon, hidden=(6, 6), rng=rng
    )
    return randomize(s_net, rng), randomize(f, rng)


@pytest.fixture
def batch(rng):
    from src.training_objectives.losses import Batch

    x0 = rng.uniform(-1, 1, size=(4, 5))
    return Batch(x0, rng.normal(size=(4, COND_DIM)))
