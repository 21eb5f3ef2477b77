import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from elliptica.gallery import bubble
from elliptica.model import Nonlinearity, SignKind, make_builtin_nonlinearity, validate_profile
from elliptica.radial_solver import (BlowUp, NoMonotoneConnection, ShootingParams,
                                     classify_tail, find_bounded_stable_branch,
                                     halfspace_profile_1d, shoot)
from elliptica.stability import morse_index_radial


def test_constant_source_gives_paraboloid():
    f = make_builtin_nonlinearity("constant", c=6.0)
    p = shoot(f, ShootingParams(3, 0.0, 10.0))
    assert np.max(np.abs(p.u + p.mesh ** 2)) <= 1e-9


def test_exp_n10_approaches_singular_tail(exp10):
    # Emden oracle: u + 2 ln r -> ln(2(N-2)) = ln 16
    v = float(exp10.u_at(1e3)) + 2 * math.log(1e3)
    assert abs(v - math.log(16.0)) <= 0.05


def test_shoot_matches_closed_form_bubble():
    f = make_builtin_nonlinearity("power", p=5.0)
    p = shoot(f, ShootingParams(3, 1.0, 60.0, mesh_ratio=1.01))
    ref = bubble(3, r_max=60.0)
    r = np.linspace(0.0, 50.0, 2001)
    assert np.max(np.abs(p.u_at(r) - ref.u_at(r))) <= 1e-7


def test_shoot_residual_certificate(f_exp):
    p = shoot(f_exp, ShootingParams(3, 0.0, 100.0, mesh_ratio=1.01))
    assert validate_profile(p, f_exp, 1e-6).passed


def test_blowup_radius_matches_independent_integration():
    f = make_builtin_nonlinearity("allen_cahn")
    with pytest.raises(BlowUp) as exc:
        shoot(f, ShootingParams(3, 2.0, 100.0))

    def rhs(r, y):
        return [y[1], -(2 / r) * y[1] - f.eval(y[0])]

    def guard(r, y):
        return abs(y[0]) - 1e8
    guard.terminal = True
    r0, a = 1e-4, 2.0
    sol = solve_ivp(rhs, (r0, 100.0), [a - f.eval(a) * r0 ** 2 / 6, -f.eval(a) * r0 / 3],
                    method="DOP853", rtol=1e-13, atol=1e-14, events=guard)
    assert exc.value.radius == pytest.approx(sol.t_events[0][0], rel=1e-6)


def test_tolerance_halving_is_consistent(f_exp):
    u = [shoot(f_exp, ShootingParams(3, 0.0, 100.0, rel_tol=t)).u[-1] for t in (1e-8, 5e-9)]
    assert abs(u[0] - u[1]) <= 5 * 1e-8 * (1 + abs(u[1]))


def test_series_handoff_insensitive(f_exp):
    p1 = shoot(f_exp, ShootingParams(10, 0.0, 1e3))
    r0 = p1.meta["series_radius"]
    p2 = shoot(f_exp, ShootingParams(10, 0.0, 1e3, series_radius=r0 / 2))
    assert abs(p1.u[-1] - p2.u[-1]) <= 1e-8 * abs(p1.u[-1])


@given(N=st.integers(3, 12), a=st.floats(-3.0, 3.0),
       kind=st.sampled_from(["exp", "power3", "power5"]))
def test_flux_monotone_for_nonnegative_f(N, a, kind):
    # r^{N-1} u' = -∫ s^{N-1} f(u) ds is nonincreasing when f >= 0
    f = make_builtin_nonlinearity("exp") if kind == "exp" else \
        make_builtin_nonlinearity("power", p=float(kind[-1]))
    p = shoot(f, ShootingParams(N, a, 50.0))
    flux = p.mesh ** (N - 1) * p.du
    scale = np.maximum.accumulate(np.abs(flux)) + 1e-300
    assert np.all(np.diff(flux) <= 1e-7 * scale[1:])


def test_branch_critical_power_has_morse_index_one():
    f = make_builtin_nonlinearity("power", p=5.0)
    samples = find_bounded_stable_branch(f, 3, (0.5, 2.0), n_samples=4, r_max=1e3)
    bounded = [s for s in samples if s.bounded]
    assert bounded
    rep = morse_index_radial(bounded[0].profile, f, [20.0, 100.0, 500.0], with_outside=False)
    assert set(rep.neg_count) == {1}


def test_branch_exp_n9_unstable_on_large_balls(f_exp):
    samples = find_bounded_stable_branch(f_exp, 9, (-2.0, 2.0), n_samples=3, r_max=1e3)
    for s in samples:
        rep = morse_index_radial(s.profile, f_exp, [10.0, 100.0, 1000.0], with_outside=False)
        assert rep.neg_count[-1] >= 1


def test_branch_requires_n_at_least_3(f_exp):
    with pytest.raises(ValueError):
        find_bounded_stable_branch(f_exp, 2, (0.0, 1.0))


def _logistic():
    return Nonlinearity("logistic", lambda t: t * (1 - t), lambda t: 1 - 2 * t,
                        sign_class=SignKind.SIGN_CHANGING, zeros=(0.0, 1.0))


def test_halfspace_logistic():
    f = _logistic()
    p = halfspace_profile_1d(f, 1.0, 40.0)
    assert p.u[0] == 0.0
    assert np.all(np.diff(p.u) >= 0)
    assert np.all(p.du[1.0 - p.u > 1e-8] > 0)
    assert p.u[-1] == pytest.approx(1.0, abs=1e-6)
    assert f.eval(p.u[-1]) == pytest.approx(0.0, abs=1e-6)


def test_halfspace_sine():
    f = Nonlinearity("sine", lambda t: np.sin(np.pi * t), lambda t: np.pi * np.cos(np.pi * t),
                     zeros=(0.0, 1.0))
    p = halfspace_profile_1d(f, 1.0, 20.0)
    assert validate_profile(p, f, 1e-8).passed
    assert np.all(np.diff(p.u) >= 0)


def test_halfspace_rejects_degenerate_targets():
    zero = make_builtin_nonlinearity("constant", c=0.0)
    with pytest.raises(NoMonotoneConnection):
        halfspace_profile_1d(zero, 0.0, 10.0)
    # F(t) = (1 - cos 2πt)/2π > F(1) = 0 inside (0, 1): no monotone orbit
    g = Nonlinearity("sin2pi", lambda t: np.sin(2 * np.pi * t),
                     lambda t: 2 * np.pi * np.cos(2 * np.pi * t), zeros=(0.0, 0.5, 1.0))
    with pytest.raises(NoMonotoneConnection):
        halfspace_profile_1d(g, 1.0, 10.0)


def test_classify_tail_labels(f_exp, exp10):
    status, _, _ = classify_tail(exp10, f_exp)
    assert status == "drifting"
    f = make_builtin_nonlinearity("power", p=5.0)
    status, limit, _ = classify_tail(bubble(3, r_max=1e4), f)
    assert status == "bounded" and abs(limit) < 1e-3
