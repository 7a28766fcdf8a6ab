import numpy as np
import pytest

from src.grasp_geometry.rectangle import GraspPose


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_pose(rng):
    """Factory drawing a random rectangle inside a 10 x 10 box."""

    def _draw(center_spread: float = 10.0) -> GraspPose:
        return GraspPose(
            cx=float(rng.uniform(0, center_spread)),
            cy=float(rng.uniform(0, center_spread)),
            w=float(rng.uniform(0.5, 4.0)),
            h=float(rng.uniform(0.5, 4.0)),
            theta=float(rng.uniform(-np.pi, np.pi)),
        )

    return _draw
