import numpy as np
import pytest

from hobm_lwr.coupling import CoupledSystem
from hobm_lwr.presets import SCENARIO_FIXED_DEG, hobm_model, lwr_model
from hobm_lwr.trajectory import TrapezoidalProfile


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def lwr():
    return lwr_model()


@pytest.fixture(scope="session")
def hobm():
    return hobm_model()


@pytest.fixture(scope="session")
def system():
    return CoupledSystem(lwr_model(), hobm_model(), payload_mass=50.0)


@pytest.fixture(scope="session")
def profile():
    return TrapezoidalProfile.from_degrees(-40.0, 40.0, 0.2, 2.0)


@pytest.fixture(scope="session")
def fixed_joints():
    return np.radians(SCENARIO_FIXED_DEG)
