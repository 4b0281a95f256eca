"""
Pytest configuration and fixtures.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add repository root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.domain.services.derham import build_complex
from src.domain.services.galerkin import Galerkin
from src.domain.services.projectors import Projectors
from src.domain.value_objects.eos import Eos
from src.domain.value_objects.spline_space import Boundary
from src.tests.factories import smooth_state

TWO_PI = 2.0 * math.pi


@pytest.fixture
def app(tmp_path, monkeypatch):
    """Create application for testing."""
    from src.app import create_app

    monkeypatch.setenv("VRMHD_OUTPUT_ROOT", str(tmp_path / "runs"))
    return create_app("testing")


@pytest.fixture(scope="session")
def complex_1d():
    """Periodic p=2 complex with 8 cells on [0, 1]."""
    return build_complex((2,), (8,), (Boundary.PERIODIC,), ((0.0, 1.0),))


@pytest.fixture(scope="session")
def complex_1d_clamped():
    """Clamped p=2 complex with 8 cells on [-1, 1]."""
    return build_complex((2,), (8,), (Boundary.CLAMPED,), ((-1.0, 1.0),))


@pytest.fixture(scope="session")
def complex_2d():
    """Doubly periodic p=2 complex with 6x6 cells on [0, 2 pi]^2."""
    return build_complex((2, 2), (6, 6), (Boundary.PERIODIC,) * 2, ((0.0, TWO_PI),) * 2)


@pytest.fixture(scope="session")
def complex_2d_clamped():
    """Periodic in x, clamped in y, p=1 with 6x6 cells."""
    return build_complex((1, 1), (6, 6), (Boundary.PERIODIC, Boundary.CLAMPED),
                         ((0.0, TWO_PI), (-1.0, 1.0)))


@pytest.fixture(scope="session")
def complex_3d():
    """Triply periodic p=1 complex with 4^3 cells."""
    return build_complex((1, 1, 1), (4, 4, 4), (Boundary.PERIODIC,) * 3)


@pytest.fixture(scope="session")
def projectors_1d(complex_1d):
    return Projectors(complex_1d)


@pytest.fixture(scope="session")
def projectors_2d(complex_2d):
    return Projectors(complex_2d)


@pytest.fixture(scope="session")
def galerkin_1d(complex_1d):
    return Galerkin(complex_1d)


@pytest.fixture(scope="session")
def galerkin_2d(complex_2d):
    return Galerkin(complex_2d)


@pytest.fixture
def eos():
    """Monatomic ideal gas."""
    return Eos(5.0 / 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)




@pytest.fixture
def state_1d(projectors_1d):
    return smooth_state(projectors_1d)


@pytest.fixture
def state_2d(projectors_2d):
    return smooth_state(projectors_2d)
