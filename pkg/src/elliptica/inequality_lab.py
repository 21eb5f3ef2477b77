"""Term-by-term evaluation of weighted radial integral inequalities.

All integrals are over R^N with dx = ω_{N-1} r^{N-1} dr, so a weight
r^{2-N} turns into the one-dimensional density r.  For a radial profile
|∇u| = |u'| and the tangential gradient vanishes.

Bookkeeping for the dilation test function ζ = r^α on [2, R] (rζ' = αζ):

    right side, gradient part   -2 r^{2-N} u'² ζ rζ'            -> -2α ζ² r^{2-N} u'²
    right side, radial part      r^{2-N} u'² rζ'((6-N)ζ + rζ')   -> α(6-N+α) ζ² r^{2-N} u'²
    left side                    (N-2)(10-N)/4 r^{2-N} u'² ζ²

so the radial derivative drops out exactly when
α² + (4-N)α = (N-2)(10-N)/4, which is what ``cancellation_identity`` measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import (Constant, EllipticaError, Linear, LogCap, Power, RadialProfile,
                    TestFunction, Zero, alpha_exponent, sphere_area)

__all__ = [
    "zeta_theorem1", "zeta_theorem8", "cancellation_identity", "radial_combination",
    "InequalityLedger", "evaluate_radial_22", "evaluate_pohozaev",
    "EnergyGrowth", "weighted_energy_growth", "h1_ratio",
    "NotStableOnSupport", "IndeterminateRatio",
]


class NotStableOnSupport(EllipticaError):
    pass


class IndeterminateRatio(EllipticaError):
    pass


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def zeta_theorem1(R1: float, R: float) -> TestFunction:
    """r⁴ on [0, R1), R1⁴ on [R1, R), log cap on [R, R²), zero beyond."""
    if not R1 > 2:
        raise ValueError("need R1 > 2")
    if not R > R1:
        raise ValueError("need R > R1")
    c = float(R1) ** 4
    return TestFunction(
        (R1, R, R * R),
        (Power(1.0, 4), Constant(c), LogCap(c, R), Zero()),
        label=f"thm1(R1={R1:g}, R={R:g})")


def zeta_theorem8(alpha: float, R: float, R2: float, eps: float = 0.0) -> TestFunction:
    """Dilation test function supported in [1, R2²].

    2^a (r-1) on [1, 2), r^a on [2, R), R^a on [R, R2), log cap on
    [R2, R2²), with a = alpha - eps (eps > 0 is the borderline variant).
    """
    a = alpha - eps
    if not a > 0:
        raise ValueError("exponent must be positive")
    if not (R2 > R > 2):
        raise ValueError("need R2 > R > 2")
    cap = float(R) ** a
    two = 2.0 ** a
    return TestFunction(
        (1.0, 2.0, R, R2, R2 * R2),
        (Zero(), Linear(two, -two), Power(1.0, a), Constant(cap), LogCap(cap, R2), Zero()),
        alpha=a, label=f"thm8(alpha={a:.12g}, R={R:g}, R2={R2:g})")


def cancellation_identity(N: int) -> float:
    """Net radial coefficient α² + (4-N)α - (N-2)(10-N)/4 at the exponent α(N)."""
    a = alpha_exponent(N)
    return a * a + (4 - N) * a - (N - 2) * (10 - N) / 4.0


def radial_combination(zeta: TestFunction, N: int, r) -> np.ndarray:
    """rζ'((6-N)ζ + rζ'), the ζ-factor of the radial right-hand side."""
    r = np.asarray(r, dtype=float)
    rz = zeta.rderiv(r)
    return rz * ((6 - N) * zeta.value(r) + rz)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (8, 16)}


def _panel_edges(knots: np.ndarray, lo: float, hi: float, resolution: int) -> np.ndarray:
    # profile knots inside (lo, hi), each interval split `resolution` times
    inner = knots[(knots > lo) & (knots < hi)]
    e = np.concatenate([[lo], inner, [hi]])
    if resolution > 1:
        t = np.arange(resolution) / resolution
        e = np.concatenate([(e[:-1, None] + np.diff(e)[:, None] * t).ravel(), [hi]])
    return e


def _gauss(g, a, b, n):
    x, w = _GL[n]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    r = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(g(r.ravel()), dtype=float).reshape(r.shape)
    return (vals * w[None, :]).sum(axis=1) * half


def _integrate(g: Callable, lo: float, hi: float, resolution: int,
               knots: np.ndarray) -> tuple[float, float]:
    """Gauss–Legendre 8/16 pairs on knot-aligned panels; returns (value, error).

    Between knots the interpolated profile is a polynomial, so the pair
    difference is a faithful local error estimate.  ``g`` must accept arrays.
    """
    if hi <= lo:
        return 0.0, 0.0
    e = _panel_edges(knots, lo, hi, resolution)
    a, b = e[:-1], e[1:]
    coarse = _gauss(g, a, b, 8)
    fine = _gauss(g, a, b, 16)
    err = float(np.sum(np.abs(fine - coarse)))
    # the profile itself is an interpolant with ~1e-10 relative accuracy
    return float(np.sum(fine)), err + 1e-9 * float(np.sum(np.abs(fine)))


@dataclass
class InequalityLedger:
    """Named integral terms with error estimates and the resulting slack."""

    name: str
    dim: int
    terms: dict
    errors: dict
    lhs: float
    rhs: float
    quadrature_error: float
    zeta: dict
    profile_id: str
    resolution: int
    notes: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def verdict(self) -> str:
        if abs(self.slack) <= self.quadrature_error:
            return "indeterminate"
        return "holds" if self.slack > 0 else "violated"

    @property
    def holds_within_error(self) -> bool:
        return self.slack >= -self.quadrature_error

    @property
    def largest_term(self) -> float:
        return max(abs(v) for v in self.terms.values())

    def to_dict(self) -> dict:
        return {
            "schema": "elliptica-ledger-v1",
            "name": self.name,
            "dim": self.dim,
            "profile": self.profile_id,
            "resolution": self.resolution,
            "zeta": self.zeta,
            "terms": {k: {"value": self.terms[k], "error": self.errors[k]} for k in self.terms},
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "quadrature_error": self.quadrature_error,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _profile_id(profile: RadialProfile) -> str:
    m = profile.meta
    return f"{m.get('nonlinearity', m.get('source', 'profile'))}:N={profile.dim}:a={profile.center_value:.12g}"


def _check_support(profile: RadialProfile, zeta: TestFunction):
    lo, hi = zeta.support
    if hi > profile.r_max * (1 + 1e-12):
        raise ValueError(f"support of ζ reaches {hi:g} beyond the profile range {profile.r_max:g}")
    return lo, hi


def _check_stable(profile, f, lo, hi, resolution=2048):
    from .stability import Annulus, Ball, LinearizedOperator, neg_count
    dom = Ball(hi) if lo <= 0 else Annulus(lo, hi)
    op = LinearizedOperator.from_profile(profile, f, dom, resolution)
    k = neg_count(op)
    if k:
        raise NotStableOnSupport(f"{k} negative radial eigenvalue(s) on {dom}")


def _knots(profile: RadialProfile) -> np.ndarray:
    return np.asarray(profile.mesh)


def _ledger_terms(profile, zeta, integrands: dict, resolution):
    terms, errors = {}, {}
    omega = sphere_area(profile.dim)
    knots = _knots(profile)
    for name, g in integrands.items():
        total = err = 0.0
        for lo, hi, piece in zeta.panels():
            v, e = _integrate(g, lo, hi, resolution, knots)
            key = f"{name}[{lo:g},{hi:g})"
            terms[key] = omega * v
            errors[key] = omega * e
            total += v
            err += e
        terms[name] = omega * total
        errors[name] = omega * err
    return terms, errors


def evaluate_radial_22(profile: RadialProfile, zeta: TestFunction, f=None,
                       resolution: int = 1, require_stable: bool = True) -> InequalityLedger:
    """Both sides of the radial dilation inequality

        2∫ r^{2-N}|∇u|² ζ rζ'  <=  ∫ r^{2-N} u_r² rζ'((6-N)ζ + rζ').

    Stability on supp ζ is checked when a nonlinearity ``f`` is supplied
    and ``require_stable`` is set.
    """
    N = profile.dim
    lo, hi = _check_support(profile, zeta)
    if require_stable and f is not None:
        _check_stable(profile, f, lo, hi)
    du, val, rd = profile.du_at, zeta.value, zeta.rderiv

    def g_lhs(r):
        return 2.0 * r * du(r) ** 2 * val(r) * rd(r)

    def g_rhs(r):
        z = rd(r)
        return r * du(r) ** 2 * z * ((6 - N) * val(r) + z)

    terms, errors = _ledger_terms(profile, zeta, {"lhs": g_lhs, "rhs": g_rhs}, resolution)
    return InequalityLedger("radial_22", N, terms, errors, terms["lhs"], terms["rhs"],
                            errors["lhs"] + errors["rhs"], zeta.describe(),
                            _profile_id(profile), resolution)


def evaluate_pohozaev(profile: RadialProfile, zeta: TestFunction, f=None,
                      resolution: int = 1, require_stable: bool = True) -> InequalityLedger:
    """Weighted Pohozaev-type inequality for ζ supported outside B_1, 3 <= N <= 10.

    lhs = (N-2)(10-N)/4 ∫ r^{2-N} u_r² ζ²
    rhs = -2∫ r^{2-N}|∇u|² ζ rζ' + ∫ r^{2-N} u_r² rζ'((6-N)ζ + rζ')

    The tangential term -2a∫ r^{2-N+2a}|∇_T u|² over B_R∖B_2 is recorded
    separately; it is exactly zero for radial input.
    """
    N = profile.dim
    if not 3 <= N <= 10:
        raise ValueError("Pohozaev-type inequality is evaluated for 3 <= N <= 10")
    lo, hi = _check_support(profile, zeta)
    if lo < 1.0:
        raise ValueError("ζ must vanish on the unit ball")
    if require_stable and f is not None:
        _check_stable(profile, f, lo, hi)
    coef = (N - 2) * (10 - N) / 4.0
    du, val, rd = profile.du_at, zeta.value, zeta.rderiv

    def g_lhs(r):
        return coef * r * du(r) ** 2 * val(r) ** 2

    def g_grad(r):
        return -2.0 * r * du(r) ** 2 * val(r) * rd(r)

    def g_rad(r):
        z = rd(r)
        return r * du(r) ** 2 * z * ((6 - N) * val(r) + z)

    integrands = {"lhs": g_lhs, "gradient_term": g_grad, "radial_term": g_rad}
    if coef == 0:
        integrands.pop("lhs")
    terms, errors = _ledger_terms(profile, zeta, integrands, resolution)
    if coef == 0:
        terms["lhs"], errors["lhs"] = 0.0, 0.0
    terms["tangential_term"], errors["tangential_term"] = 0.0, 0.0
    rhs = terms["gradient_term"] + terms["radial_term"] + terms["tangential_term"]
    err = errors["lhs"] + errors["gradient_term"] + errors["radial_term"]
    led = InequalityLedger("pohozaev", N, terms, errors, terms["lhs"], rhs, err,
                           zeta.describe(), _profile_id(profile), resolution)
    led.notes.append("tangential term vanishes identically for radial profiles")
    if coef == 0:
        led.notes.append("left coefficient (N-2)(10-N)/4 is exactly zero")
    return led


# ---------------------------------------------------------------------------
# growth of weighted energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyGrowth:
    radii: tuple
    energies: tuple
    errors: tuple
    ratios: tuple
    log_slope: float        # least-squares d E / d ln R

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.ratios, self.ratios[1:]))

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.ratios, self.ratios[1:]))


def weighted_energy_growth(profile: RadialProfile, radii: Sequence[float],
                           resolution: int = 1) -> EnergyGrowth:
    """∫_{B_R} r^{2-N}|∇u|² and its ratio to ln R over the given radii (R > 1)."""
    radii = [float(R) for R in radii]
    if min(radii) <= 1:
        raise ValueError("radii must exceed 1 so that ln R > 0")
    if max(radii) > profile.r_max * (1 + 1e-12):
        raise ValueError("radii exceed the profile range")
    omega = sphere_area(profile.dim)
    du = profile.du_at
    knots = _knots(profile)

    def g(r):
        return r * du(r) ** 2

    E, errs = [], []
    acc = acc_err = 0.0
    prev = 0.0
    for R in sorted(radii):
        v, e = _integrate(g, prev, R, resolution, knots)
        acc += v
        acc_err += e
        prev = R
        E.append(omega * acc)
        errs.append(omega * acc_err)
    order = np.argsort(radii)
    radii_sorted = [radii[i] for i in order]
    lr = np.log(radii_sorted)
    ratios = [e / l for e, l in zip(E, lr)]
    slope = float(np.polyfit(lr, E, 1)[0]) if len(E) > 1 else math.nan
    return EnergyGrowth(tuple(radii_sorted), tuple(E), tuple(errs), tuple(ratios), slope)


def h1_ratio(profile: RadialProfile, R: float, resolution: int = 1) -> float:
    """∫_{B_R}|∇u|² / (R^{N-2} (⨍_{B_2R} u)²)."""
    N = profile.dim
    if 2 * R > profile.r_max * (1 + 1e-12):
        raise ValueError("profile must extend to 2R")
    du, u = profile.du_at, profile.u_at
    knots = _knots(profile)
    grad, _ = _integrate(lambda r: r ** (N - 1) * du(r) ** 2, 0.0, R, resolution, knots)
    mass, _ = _integrate(lambda r: r ** (N - 1) * u(r), 0.0, 2 * R, resolution, knots)
    mean = N * mass / (2 * R) ** N
    scale, _ = _integrate(lambda r: r ** (N - 1) * abs(u(r)), 0.0, 2 * R, resolution, knots)
    if mean <= 1e-12 * (N * scale / (2 * R) ** N) or mean <= 0:
        raise IndeterminateRatio(f"average over B_{2 * R:g} is not positive ({mean:.3e})")
    return sphere_area(N) * grad / (R ** (N - 2) * mean ** 2)
