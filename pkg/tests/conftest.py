import numpy as np
import pytest

from wwgm import PhaseGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def grid():
    """Small default rig for unit tests."""
    return PhaseGrid(n=1, N=128, L=8.0)


@pytest.fixture(scope="session")
def grid256():
    """Default acceptance rig."""
    return PhaseGrid(n=1, N=256, L=8.0)
