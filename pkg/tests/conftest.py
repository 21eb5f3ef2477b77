import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elliptica.model import RadialProfile, make_builtin_nonlinearity
from elliptica.radial_solver import ShootingParams, shoot

settings.register_profile("elliptica", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("elliptica")


@pytest.fixture(scope="session")
def f_exp():
    return make_builtin_nonlinearity("exp")


@pytest.fixture(scope="session")
def exp10(f_exp):
    """Exp solution in N = 10 shot from u(0) = 0 out to r = 1e4."""
    return shoot(f_exp, ShootingParams(10, 0.0, 1e4, mesh_ratio=1.01))


def constant_profile(N, c, r_max=100.0, n=200):
    r = np.concatenate([[0.0], np.geomspace(1e-3, r_max, n - 1)])
    return RadialProfile(N, r, np.full_like(r, c), np.zeros_like(r), c, c, {"source": "constant"})


def paraboloid_profile(N, r_max=1e4, n=400):
    r = np.concatenate([[0.0], np.geomspace(1e-3, r_max, n - 1)])
    return RadialProfile(N, r, -r ** 2, -2 * r, 0.0, -r_max ** 2, {"source": "paraboloid"},
                         np.full_like(r, -2.0))
