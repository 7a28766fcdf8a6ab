import numpy as np
import pytest

from src.diffusion_schedule.noise_schedule import NoiseSchedule
from src.synthetic_scenes.gaussian_toy import GaussianToy

SCHEDULE = NoiseSchedule()


@pytest.fixture
def toy(rng):
    return GaussianToy.random(3, rng)


def test_validation():
    with pytest.raises(ValueError):
        GaussianToy(((0.0, 0.0),))
    with pytest.raises(ValueError):
        GaussianToy(((0.0,) * 5,), sigma=0.0)


def test_samples_follow_class_means(toy, rng):
    x0, y, labels = toy.sample(30_000, rng)
    assert y.shape == (30_000, 3)
    for k in range(3):
        rows = x0[labels == k]
        np.testing.assert_allclose(rows.mean(axis=0), toy.means[k], atol=0.01)
        np.testing.assert_allclose(rows.std(axis=0), toy.sigma, rtol=0.05)


def test_marginal_score_matches_finite_difference_of_log_density(toy):
    t = 300.0
    y = toy.condition(1)
    x = np.array([0.1, -0.2, 0.3, 0.0, 0.5])
    alpha = SCHEDULE.alpha(t)
    var = alpha * toy.sigma ** 2 + 1 - alpha
    mean = np.sqrt(alpha) * np.asarray(toy.means[1])

    def log_p(v):
        return -np.sum((v - mean) ** 2) / (2 * var)

    h = 1e-6
    numeric = [
        (log_p(x + h * e) - log_p(x - h * e)) / (2 * h) for e in np.eye(5)
    ]
    score = toy.marginal_score(x, t, y, SCHEDULE)
    np.testing.assert_allclose(score, numeric, rtol=1e-6)


def test_flow_map_preserves_standardized_coordinate(toy, rng):
    y = np.eye(3)[rng.integers(0, 3, 8)]
    x = rng.normal(size=(8, 5))
    there = toy.flow_map(x, 900.0, 100.0, y, SCHEDULE)
    back = toy.flow_map(there, 100.0, 900.0, y, SCHEDULE)
    np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12)


def test_posterior_mean_near_data(toy):
    y = toy.condition(2)
    x = np.zeros(5)
    np.testing.assert_allclose(
        toy.posterior_mean(x, SCHEDULE.T, y, SCHEDULE), toy.means[2], atol=1e-3
    )
