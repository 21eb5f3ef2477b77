import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from elliptica.emden import singular_solution
from elliptica.gallery import bubble
from elliptica.model import make_builtin_nonlinearity
from elliptica.stability import (Annulus, Ball, LinearizedOperator, MeshTooCoarse, NoThreshold,
                                 comparison_stability_test, hardy_power_threshold, lambda1,
                                 morse_index_radial, neg_count, singular_is_stable,
                                 singular_operator, sturm_count)

from conftest import constant_profile

# λ1 of -Δ - 2(N-2)/r² on Annulus(0.1, 10), radial sector.  With t = ln r and
# φ = r^{-(N-2)/2} ψ the problem is Bessel's equation of order
# ν = sqrt((N-2)²/4 - 2(N-2)); for N = 10, 11 λ1 is the first root of
# J_ν(ka)Y_ν(kb) - J_ν(kb)Y_ν(ka), for N = 9 (imaginary ν) a uniform-t
# finite-difference eigensolve extrapolated from 8000 and 16000 cells.
SINGULAR_LAMBDA1 = {9: -2.44929416, 10: 0.078451626784445, 11: 0.20191013455809054}


def test_ball_dirichlet_laplacian():
    op = LinearizedOperator.from_potential(3, lambda r: 0.0 * r, Ball(1.0), 4096)
    lam = lambda1(op)
    assert lam == pytest.approx(math.pi ** 2, rel=1e-6)
    oracle = eigvalsh_tridiagonal(op.diag, op.offdiag, select="i", select_range=(0, 0))[0]
    assert lam == pytest.approx(oracle, rel=1e-9)


def test_operator_is_symmetric():
    op = LinearizedOperator.from_potential(5, lambda r: np.exp(-r), Annulus(0.5, 3.0), 512)
    n = len(op.diag)
    A = np.diag(op.diag) + np.diag(op.offdiag, 1) + np.diag(op.offdiag, -1)
    assert np.max(np.abs(A - A.T)) <= 1e-14
    assert len(op.offdiag) == n - 1


@pytest.mark.parametrize("N", [9, 10, 11])
def test_singular_exp_annulus_against_oracle(N):
    lams = [lambda1(singular_operator("exp", N, Annulus(0.1, 10.0), n)) for n in (2048, 4096, 8192)]
    ref = SINGULAR_LAMBDA1[N]
    assert lams[1] == pytest.approx(ref, rel=1e-5)
    # second-order convergence: successive errors shrink by about 4
    e1, e2 = lams[1] - lams[0], lams[2] - lams[1]
    assert 3.5 <= e1 / e2 <= 4.5
    rich = lams[2] + e2 / 3
    assert rich == pytest.approx(ref, rel=2e-7)


def test_singular_signs():
    assert lambda1(singular_operator("exp", 9, Annulus(0.1, 10.0), 4096)) < -1e-3
    for N in (10, 11):
        assert lambda1(singular_operator("exp", N, Annulus(0.1, 10.0), 4096)) >= -1e-4


def test_hardy_borderline_decays_to_zero_from_above():
    lams = [lambda1(singular_operator("exp", 10, Annulus(0.1, R), 4096)) for R in (10.0, 100.0, 1000.0)]
    assert all(l > 0 for l in lams)
    assert lams[0] > lams[1] > lams[2]


def test_hardy_exact_arithmetic():
    assert singular_is_stable("exp", 10) and singular_is_stable("exp", 11)
    assert not singular_is_stable("exp", 9)


def test_hardy_threshold_values():
    with pytest.raises(NoThreshold):
        hardy_power_threshold(10)
    p11 = hardy_power_threshold(11)
    assert 6.5 < p11 < 7.5
    assert p11 == pytest.approx(1 + 4 / (11 - 4 - 2 * math.sqrt(10)), abs=1e-7)
    ps = [hardy_power_threshold(N) for N in range(11, 21)]
    assert all(b < a for a, b in zip(ps, ps[1:]))


def test_no_threshold_dense_scan_oracle():
    # N = 10: p m (N - 2 - m) > (N - 2)²/4 for every p >= (N+2)/(N-2)
    p = np.geomspace(1.5, 1e3, 200001)
    m = 2 / (p - 1)
    assert np.all(p * m * (8 - m) > 16.0)


def test_power_stability_flags_straddle_threshold():
    p11 = hardy_power_threshold(11)
    assert singular_is_stable("power", 11, p11 + 0.05)
    assert not singular_is_stable("power", 11, p11 - 0.05)


def test_constant_profile_nonpositive_potential_is_stable():
    f = make_builtin_nonlinearity("allen_cahn")
    rep = morse_index_radial(constant_profile(3, 1.0), f, [1.0, 10.0, 50.0], with_outside=False)
    assert rep.neg_count == (0, 0, 0)


def test_bubble_morse_index_and_outside_radius():
    f = make_builtin_nonlinearity("power", p=5.0)
    rep = morse_index_radial(bubble(3, r_max=1e4), f, [20.0, 100.0, 1000.0])
    assert rep.neg_count == (1, 1, 1)
    assert math.sqrt(3) * 0.95 < rep.r0_outside < math.sqrt(3) * 1.05
    assert rep.is_monotone()


def test_exp_n10_stable_up_to_1e3(exp10, f_exp):
    rep = morse_index_radial(exp10, f_exp, [1.0, 10.0, 100.0, 1000.0], with_outside=False)
    assert rep.stable_on_all
    assert rep.is_monotone()


def test_comparison_with_singular(exp10):
    res = comparison_stability_test(exp10, singular_solution("exp", 10))
    assert res.below_singular and res.singular_stable and res.supports_stability
    assert res.heuristic
    zero = comparison_stability_test(constant_profile(10, 0.0, r_max=100.0), singular_solution("exp", 10))
    assert not zero.below_singular and not zero.supports_stability


def test_resolution_floor():
    with pytest.raises(MeshTooCoarse):
        LinearizedOperator.from_potential(3, lambda r: 0 * r, Ball(1.0), 100)
    op = LinearizedOperator.from_potential(3, lambda r: 1e5 + 0 * r, Ball(1.0), 200)
    with pytest.raises(MeshTooCoarse):
        lambda1(op)


@given(st.integers(2, 60), st.integers(0, 2 ** 32 - 1))
def test_sturm_count_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    d, e = rng.normal(size=n), rng.normal(size=n - 1)
    ev = eigvalsh_tridiagonal(d, e)
    x = float(rng.normal())
    if np.min(np.abs(ev - x)) < 1e-9:
        return
    assert sturm_count(d.tolist(), (e ** 2).tolist(), x) == int(np.sum(ev < x))


@given(st.integers(3, 12), st.floats(0.5, 20.0))
def test_domain_monotonicity(N, amp):
    V = lambda r: amp * np.exp(-r * r)
    lams = [lambda1(LinearizedOperator.from_potential(N, V, Ball(R), 1024)) for R in (1.0, 2.0, 4.0)]
    assert lams[0] >= lams[1] >= lams[2]


@given(st.integers(0, 2 ** 64 - 1))
def test_stable_implies_nonnegative_form(seed):
    f = make_builtin_nonlinearity("exp")
    from elliptica.radial_solver import ShootingParams, shoot
    prof = shoot(f, ShootingParams(10, 0.0, 200.0))
    op = LinearizedOperator.from_profile(prof, f, Ball(100.0), 512)
    assert neg_count(op) == 0
    rng = np.random.default_rng(seed)
    lam = lambda1(op)
    for _ in range(100):
        phi = rng.standard_normal(len(op.diag))
        q = op.quadratic_form(phi)
        assert q >= -1e-9 * abs(q)
        assert q >= (lam - 1e-9) * float(np.dot(op.mass, phi ** 2))
