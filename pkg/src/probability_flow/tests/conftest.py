import numpy as np
import pytest

from src.diffusion_schedule.noise_schedule import NoiseSchedule
from src.synthetic_scenes.gaussian_toy import GaussianToy


@pytest.fixture(scope="package")
def schedule():
    return NoiseSchedule()


@pytest.fixture
def rng():
    return np.random.default_rng(314)


@pytest.fixture(scope="package")
def toy():
    means = (
        (0.3, -0.2, 0.1, 0.0, -0.3),
        (-0.25, 0.2, -0.1, 0.15, 0.05),
    )
    return GaussianToy(means, sigma=0.2)


class CountingField:
    """Wraps a field and counts calls."""

    def __init__(self, field):
        self.field = field
        self.calls = 0

    def __call__(self, x_t, t, y):
        self.calls += 1
        return self.field(x_t, t, y)
