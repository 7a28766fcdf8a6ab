import numpy as np
import pytest

from src.diffusion_schedule.noise_schedule import NoiseSchedule


@pytest.fixture(scope="package")
def schedule():
    return NoiseSchedule()


@pytest.fixture
def rng():
    return np.random.default_rng(7)
