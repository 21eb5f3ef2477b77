import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from conftest import constant_profile, paraboloid_profile
from elliptica.gallery import bubble
from elliptica.inequality_lab import (IndeterminateRatio, NotStableOnSupport, _integrate,
                                      cancellation_identity, evaluate_pohozaev,
                                      evaluate_radial_22, h1_ratio, radial_combination,
                                      weighted_energy_growth, zeta_theorem1, zeta_theorem8)
from elliptica.model import alpha_exponent, make_builtin_nonlinearity, sphere_area
from elliptica.radial_solver import ShootingParams, shoot


@pytest.fixture(scope="module")
def bubble5():
    """Bubble concentrated enough to be stable outside B_1."""
    return bubble(5, r_max=1e4, scale=2 * math.sqrt(15))


@pytest.fixture(scope="module")
def f_crit5():
    return make_builtin_nonlinearity("power", p=7 / 3)


# --- test functions ---------------------------------------------------------

def test_zeta_quartic_cap_pieces():
    z = zeta_theorem1(3, 10)
    assert z.value(np.array(3.0)) == pytest.approx(81.0)
    assert z.value(np.array(7.0)) == pytest.approx(81.0)
    assert z.value(np.array(100.0)) == 0.0
    assert z.value(np.array(150.0)) == 0.0
    r = np.linspace(0.1, 2.9, 17)
    np.testing.assert_allclose(z.rderiv(r), 4 * z.value(r), rtol=1e-14)
    # log cap is continuous and decreasing to zero
    r = np.linspace(10, 100, 50)
    assert np.all(np.diff(z.value(r)) < 0)


@pytest.mark.parametrize("R1,R", [(2.0, 10.0), (1.0, 10.0), (5.0, 5.0), (6.0, 4.0)])
def test_zeta_quartic_cap_rejects(R1, R):
    with pytest.raises(ValueError):
        zeta_theorem1(R1, R)


def test_zeta_dilation_family():
    assert alpha_exponent(10) == pytest.approx(6.0, abs=1e-14)
    assert alpha_exponent(3) == pytest.approx(0.91421356, abs=1e-8)
    a = alpha_exponent(5)
    z = zeta_theorem8(a, 10, 100)
    assert z.support == (1.0, 1e4)
    left = z.value(np.array(2 - 1e-12))
    assert left == pytest.approx(2 ** a, rel=1e-10)
    assert z.value(np.array(2.0)) == pytest.approx(2 ** a, rel=1e-14)
    r = np.linspace(2.5, 9.5, 11)
    np.testing.assert_allclose(z.rderiv(r), a * z.value(r), rtol=1e-13)
    ze = zeta_theorem8(a, 10, 100, eps=0.1)
    assert ze.alpha == pytest.approx(a - 0.1)
    with pytest.raises(ValueError):
        zeta_theorem8(a, 10, 5)
    with pytest.raises(ValueError):
        zeta_theorem8(0.1, 10, 100, eps=0.2)


@pytest.mark.parametrize("N", range(3, 65))
def test_cancellation_identity(N):
    assert abs(cancellation_identity(N)) <= 1e-12 * max(1.0, N * N)


def test_radial_combination_vanishes_at_n10():
    z = zeta_theorem1(3, 50)
    r = np.linspace(0.0, 50.0, 1000, endpoint=False)
    assert np.max(np.abs(radial_combination(z, 10, r))) <= 1e-12


# --- ledgers ----------------------------------------------------------------

def test_constant_profile_ledger_zero():
    p = constant_profile(10, 1.5, r_max=3000.0)
    led = evaluate_radial_22(p, zeta_theorem1(5, 50))
    assert led.lhs == 0.0 and led.rhs == 0.0
    assert led.verdict == "indeterminate"


@pytest.mark.parametrize("resolution", [1, 2])
def test_radial_22_exp10_holds(exp10, f_exp, resolution):
    led = evaluate_radial_22(exp10, zeta_theorem1(5, 50), f_exp, resolution=resolution)
    assert led.holds_within_error
    assert led.verdict == "holds"
    assert led.slack > 0


def test_quadrature_convergence(exp10):
    z = zeta_theorem1(5, 50)
    a = evaluate_radial_22(exp10, z, resolution=1)
    b = evaluate_radial_22(exp10, z, resolution=2)
    for key in a.terms:
        assert abs(a.terms[key] - b.terms[key]) <= 10 * a.errors[key] + 1e-300


def test_integrate_matches_quad(exp10):
    N = exp10.dim
    du = exp10.du_at

    def g(r):
        return r * du(r) ** 2

    for lo, hi in [(0.0, 5.0), (5.0, 50.0), (50.0, 2500.0)]:
        val, err = _integrate(g, lo, hi, 1, np.asarray(exp10.mesh))
        ref, _ = quad(lambda x: float(g(np.array(x))), lo, hi, epsabs=0, epsrel=1e-13, limit=2000,
                      points=[k for k in exp10.mesh if lo < k < hi][:1000] or None)
        assert val == pytest.approx(ref, rel=1e-10)


def test_integrate_polynomial_exact():
    knots = np.array([0.0, 1.0, 2.0, 3.0])
    val, err = _integrate(lambda r: r ** 5 - 2 * r, 0.0, 3.0, 1, knots)
    assert val == pytest.approx(3 ** 6 / 6 - 9, rel=1e-14)
    assert err < 1e-6


def test_pohozaev_bubble_n5(bubble5, f_crit5):
    z = zeta_theorem8(alpha_exponent(5), 10, 100)
    led = evaluate_pohozaev(bubble5, z, f_crit5)
    assert led.terms["tangential_term"] == 0.0
    assert led.holds_within_error
    assert led.quadrature_error < 1e-3 * led.largest_term


def test_pohozaev_unit_bubble_not_stable(f_crit5):
    p = bubble(5, r_max=1e4)
    with pytest.raises(NotStableOnSupport):
        evaluate_pohozaev(p, zeta_theorem8(alpha_exponent(5), 10, 100), f_crit5)


def test_pohozaev_n10_coefficient_zero(exp10):
    led = evaluate_pohozaev(exp10, zeta_theorem8(alpha_exponent(10), 4, 20))
    assert led.lhs == 0.0
    assert any("zero" in n for n in led.notes)


def test_pohozaev_rejections(exp10):
    with pytest.raises(ValueError):
        evaluate_pohozaev(bubble(11, r_max=1e4), zeta_theorem8(1.0, 10, 50))
    z = zeta_theorem1(3, 10)  # support touches the origin
    with pytest.raises(ValueError):
        evaluate_pohozaev(exp10, z)


def test_support_beyond_profile():
    p = constant_profile(10, 1.0, r_max=100.0)
    with pytest.raises(ValueError):
        evaluate_radial_22(p, zeta_theorem1(5, 50))


# --- weighted energy growth -------------------------------------------------

def test_energy_growth_constant():
    g = weighted_energy_growth(constant_profile(10, 2.0, r_max=1e3), [4, 16, 64, 256])
    assert all(e == 0.0 for e in g.energies)


def test_energy_growth_paraboloid_diverges():
    N = 10
    g = weighted_energy_growth(paraboloid_profile(N), [2.0 ** k for k in range(4, 11)])
    assert g.strictly_increasing
    # ∫_{B_R} r^{2-N}·4r² dx = ω R⁴
    R = g.radii[-1]
    assert g.energies[-1] == pytest.approx(sphere_area(N) * R ** 4, rel=1e-8)


def test_energy_growth_exp_decreasing(f_exp):
    p = shoot(f_exp, ShootingParams(10, 4.0, 2e3, mesh_ratio=1.01))
    g = weighted_energy_growth(p, [2.0 ** k for k in range(4, 11)])
    assert g.strictly_decreasing
    # slope in ln R tends to 4ω
    assert g.log_slope == pytest.approx(4 * sphere_area(10), rel=0.05)


def test_energy_growth_rejects_small_radius(exp10):
    with pytest.raises(ValueError):
        weighted_energy_growth(exp10, [1.0, 4.0])


# --- H¹ ratio ----------------------------------------------------------------

RADII = [4, 8, 16, 32, 64, 128, 256]


def test_h1_ratio_constant():
    p = constant_profile(10, 3.0, r_max=1e3)
    assert h1_ratio(p, 16.0) == 0.0


def test_h1_ratio_exp_indeterminate(f_exp):
    # u -> -inf, so the ball averages are eventually negative
    p = shoot(f_exp, ShootingParams(10, 0.0, 1e3, mesh_ratio=1.01))
    for R in RADII:
        with pytest.raises(IndeterminateRatio):
            h1_ratio(p, R)


def test_h1_ratio_bubble_grows():
    # unstable near the origin: the ball average decays like R^{2-N}
    # while ∫|∇u|² converges, so the ratio grows like R^{N-2}
    p = bubble(5, r_max=1e3)
    vals = [h1_ratio(p, R) for R in RADII]
    assert np.all(np.diff(vals) > 0)
    slope = math.log(vals[-1] / vals[-2]) / math.log(2)
    assert slope == pytest.approx(3.0, abs=0.02)


@pytest.fixture(scope="module")
def stable_power11():
    f = make_builtin_nonlinearity("power", p=7)
    return shoot(f, ShootingParams(11, 1.0, 2100.0, mesh_ratio=1.01))


def test_h1_ratio_stable_power_bounded(stable_power11):
    N, a = 11, 1 / 3
    limit = sphere_area(N) * a * a * 4 ** a * (N - a) ** 2 / ((N - 2 - 2 * a) * N * N)
    vals = [h1_ratio(stable_power11, R) for R in RADII + [512, 1024]]
    assert max(vals) <= limit * (1 + 1e-8)
    assert vals[-1] == pytest.approx(limit, rel=1e-7)


@given(st.floats(2.0, 500.0))
def test_h1_ratio_nonnegative(stable_power11, R):
    assert h1_ratio(stable_power11, R) >= 0.0


def test_h1_ratio_beyond_range(stable_power11):
    with pytest.raises(ValueError):
        h1_ratio(stable_power11, 2000.0)
