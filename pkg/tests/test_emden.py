import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elliptica.emden import (FixedPointKind, build_emden, classify_fixed_point,
                             emden_trajectory, exact_discriminant, singular_solution,
                             write_trajectory_csv)
from elliptica.model import make_builtin_nonlinearity
from elliptica.radial_solver import ShootingParams, shoot


def test_exp_n10_double_eigenvalue():
    sys = build_emden("exp", 10)
    assert all(abs(l - (-4.0)) < 1e-7 for l in sys.eigenvalues)
    assert exact_discriminant("exp", 10) == 0


def test_exp_n3_fixed_point():
    assert build_emden("exp", 3).fixed_point == pytest.approx(math.log(2.0), abs=1e-15)


def test_exp_n9_spiral_sink():
    sys = build_emden("exp", 9)
    # companion-matrix oracle
    ev = np.linalg.eigvals(sys.jacobian)
    assert np.allclose(sorted(ev, key=lambda z: z.imag), sorted(sys.eigenvalues, key=lambda z: z.imag))
    assert all(l.real == pytest.approx(-3.5) for l in sys.eigenvalues)
    assert all(abs(l.imag) > 0 for l in sys.eigenvalues)
    assert exact_discriminant("exp", 9) == -7
    assert classify_fixed_point(sys) is FixedPointKind.SPIRAL_SINK


@pytest.mark.parametrize("N,disc", [(10, 0), (11, 9), (12, 20)])
def test_exact_discriminants(N, disc):
    assert exact_discriminant("exp", N) == disc
    assert isinstance(exact_discriminant("exp", N), Fraction)


def test_classification_threshold():
    kinds = {N: classify_fixed_point(build_emden("exp", N)) for N in range(3, 21)}
    assert all(kinds[N] is FixedPointKind.SPIRAL_SINK for N in range(3, 10))
    assert kinds[10] is FixedPointKind.DEGENERATE_NODE
    assert all(kinds[N] is FixedPointKind.REAL_SINK for N in range(11, 21))


@given(st.integers(3, 30))
def test_system_invariants(N):
    sys = build_emden("exp", N)
    assert sys.fixed_point_residual() <= 1e-12
    for lam in sys.eigenvalues:
        assert abs(sys.char_poly(lam)) <= 1e-12 * (1 + abs(lam) ** 2)


@given(st.integers(3, 14), st.floats(1.0, 20.0))
def test_power_system_invariants(N, dp):
    p = N / (N - 2) + dp
    sys = build_emden("power", N, p)
    assert sys.fixed_point_residual() <= 1e-12
    for lam in sys.eigenvalues:
        assert abs(sys.char_poly(lam)) <= 1e-12 * (1 + abs(lam) ** 2)


def test_power_range_rejected():
    with pytest.raises(ValueError):
        build_emden("power", 3, 2.5)     # p <= N/(N-2) = 3
    with pytest.raises(ValueError):
        build_emden("exp", 2)


def test_singular_values_and_residual():
    us = singular_solution("exp", 10)
    assert us.u(1.0) == pytest.approx(math.log(16.0), abs=1e-15)
    for N in (3, 9, 10, 11, 20):
        s = singular_solution("exp", N)
        assert abs(s.residual(0.5)) <= 1e-11
        r = np.geomspace(1e-3, 1e3, 501)
        assert np.max(np.abs(s.relative_residual(r))) <= 1e-11


def test_power_amplitude():
    us = singular_solution("power", 6, 3.0)
    assert us.amplitude ** 2 == pytest.approx(3.0, rel=1e-14)
    r = np.geomspace(1e-2, 1e2, 101)
    assert np.max(np.abs(us.relative_residual(r))) <= 1e-12


@pytest.mark.parametrize("N", [
    pytest.param(3, marks=pytest.mark.xfail(
        strict=True, reason="slowest spiral (Re λ = -1/2): distance 0.055 at t = ln 1e3 from u(0) = 0")),
    4, 9, 10, 12])
def test_trajectory_converges_to_fixed_point(N):
    f = make_builtin_nonlinearity("exp")
    prof = shoot(f, ShootingParams(N, 0.0, 1e3, mesh_ratio=1.01))
    t, v, dv = emden_trajectory(prof)
    sys = build_emden("exp", N)
    dist = math.hypot(v[-1] - sys.fixed_point, dv[-1])
    assert dist <= 0.05
    # oscillation about v* iff spiral sink (tail after the initial transient)
    keep = t > 1.0
    crossings = np.sum(np.diff(np.sign(v[keep] - sys.fixed_point)) != 0)
    if classify_fixed_point(sys) is FixedPointKind.SPIRAL_SINK:
        assert crossings >= 2
    else:
        assert crossings <= 1


def test_trajectory_csv(tmp_path):
    p = tmp_path / "traj.csv"
    write_trajectory_csv(p, [0.0, 1.0], [1.0, 2.0], [0.5, 0.25])
    lines = p.read_text().splitlines()
    assert lines[0] == "t,v,dv" and len(lines) == 3
