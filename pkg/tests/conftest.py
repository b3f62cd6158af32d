import numpy as np
import pytest

from app.models.geometry import build_geometry
from app.models.states import Viscosities
from app.schemas.run_config import IterationConfig
from app.utils.helpers.manufactured import compatible_data, trivial_data


@pytest.fixture
def geometry():
    return build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8)


@pytest.fixture
def small_geometry():
    return build_geometry(1.0, 2.0, 3.0, 4, 4, 4, 4, 4)


@pytest.fixture
def visc():
    return Viscosities(lam=1.0, mu=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def iteration():
    return IterationConfig(T=0.05, dt=0.0125, tol=1e-8, max_iter=30)


@pytest.fixture
def compatible(geometry, visc):
    return compatible_data(geometry, visc, gamma=0.1)


@pytest.fixture
def trivial(geometry, visc):
    return trivial_data(geometry, visc)
