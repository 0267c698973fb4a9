import numpy as np
import pytest

from mero.config import get_settings, update_settings
from mero.geometry import PrimalGeometry, ProductGeometry, SimplexGeometry
from mero.problems.loss import LogisticLoss
from mero.problems.sources.finite_support import FiniteSupportDistribution, build_finite_task


@pytest.fixture(autouse=True)
def restore_settings():
    snapshot = get_settings().model_dump()
    yield
    update_settings(**snapshot)


@pytest.fixture
def loss():
    return LogisticLoss()


def random_distribution(rng, atoms=20, dimension=5, positive_share=0.7):
    X = rng.standard_normal((atoms, dimension))
    X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))
    labels = np.where(rng.random(atoms) < positive_share, 1.0, -1.0)
    probs = rng.random(atoms) + 0.1
    return FiniteSupportDistribution(atoms=X, labels=labels, probs=probs / probs.sum())


@pytest.fixture
def line_distributions():
    """Two 1-d distributions whose risk minimizers sit on opposite sides of the origin."""
    right = FiniteSupportDistribution(
        atoms=np.array([[1.0], [0.5], [-0.5]]),
        labels=np.array([1.0, 1.0, 1.0]),
        probs=np.array([0.4, 0.3, 0.3]),
    )
    left = FiniteSupportDistribution(
        atoms=np.array([[1.0], [-1.0], [0.25]]),
        labels=np.array([-1.0, 1.0, 1.0]),
        probs=np.array([0.5, 0.3, 0.2]),
    )
    return [right, left]


@pytest.fixture
def finite_task(line_distributions):
    return build_finite_task(line_distributions, seed=7)


@pytest.fixture
def line_geometry():
    return ProductGeometry(primal=PrimalGeometry(dimension=1, radius=2.0), simplex=SimplexGeometry(m=2))
