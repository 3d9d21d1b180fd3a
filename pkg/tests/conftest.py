import math

import numpy as np
import pytest
from typer.testing import CliRunner

from app.main import app
from app.schemas.config_schema import MHZ
from app.schemas.spin_schema import EseemGrid, SpinSystem, SyntheticPeak


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def app_instance():
    return app


@pytest.fixture
def small_grid():
    return EseemGrid(n1=41, n2=41, dt1=80e-9, dt2=80e-9)


def axial_tensor(perp_mhz: float, par_mhz: float) -> np.ndarray:
    return np.diag([perp_mhz, perp_mhz, par_mhz]) * MHZ


def field_vector(gauss: float, polar_deg: float, azimuth_deg: float = 0.0) -> np.ndarray:
    theta, phi = math.radians(polar_deg), math.radians(azimuth_deg)
    return gauss * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@pytest.fixture
def misaligned_system():
    return SpinSystem(B=field_vector(100.9, 34.1), A_14N=axial_tensor(-2.70, -2.14))


@pytest.fixture
def aligned_system():
    return SpinSystem(B=field_vector(100.9, 0.0), A_14N=axial_tensor(-2.70, -2.14))


@pytest.fixture
def rank4_peaks():
    return [
        SyntheticPeak(nu1=1.5e6, nu2=2.0e6, amplitude=1.0),
        SyntheticPeak(nu1=3.0e6, nu2=5.5e6, amplitude=0.8),
        SyntheticPeak(nu1=6.0e6, nu2=1.0e6, amplitude=0.6),
        SyntheticPeak(nu1=9.0e6, nu2=8.0e6, amplitude=0.5),
    ]


@pytest.fixture
def low_rank_matrix(rng):
    """A 20x20 rank-2 matrix with O(1) entries."""
    U = rng.uniform(1.0, 2.0, size=(20, 2))
    V = rng.uniform(1.0, 2.0, size=(20, 2))
    return U @ V.T
