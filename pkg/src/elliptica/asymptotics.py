"""Decay rates at infinity of radial profiles: pointwise, Dirichlet-energy tails,
L^{2*} membership and a scale-invariant Hölder/L¹ ratio.

All fits are log-log least squares over dyadic radii R_k = 2^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inequality_lab import _integrate
from .model import (DecayFit, DecayQuantity, EllipticaError, RadialProfile,
                    gradient_tail_exponent, sphere_area, sup_decay_exponent)

__all__ = [
    "NoFiniteLimit", "normalize_to_zero_limit", "tail_limit", "dyadic_radii",
    "fit_sup_decay", "fit_gradient_tail", "L2StarResult", "l2star_norm",
    "CAlphaResult", "calpha_ratio", "EXPONENT_SLACK",
]

EXPONENT_SLACK = 0.05
TV_GATE = 1e-4
FIT_RESIDUAL_MAX = 0.05


class NoFiniteLimit(EllipticaError):
    pass


def _band(profile, lo, hi, n=257):
    r = np.linspace(lo, hi, n)
    return profile.u_at(r)


def tail_limit(profile: RadialProfile, tv_gate: float = TV_GATE) -> tuple[float, float]:
    """Estimate lim u(r) from the last dyadic bands; returns (limit, tail variation).

    The mean over the last band [R/2, R] is the primary estimate.  A power
    tail ℓ + C r^{-γ} makes band means at dyadic radii a geometric sequence,
    so one Aitken Δ² step over the last three bands removes the bias.
    """
    R = profile.r_max
    band = _band(profile, 0.5 * R, R)
    tv = float(np.sum(np.abs(np.diff(band))))
    mean = float(np.mean(band))
    if tv > tv_gate * (1.0 + abs(mean)):
        raise NoFiniteLimit(f"tail variation {tv:.3e} on [{0.5 * R:g}, {R:g}] exceeds the gate")
    m = [float(np.mean(_band(profile, R / 2 ** (k + 1), R / 2 ** k))) for k in (2, 1, 0)]
    d1, d2 = m[1] - m[0], m[2] - m[1]
    den = d2 - d1
    if d1 != 0 and den != 0 and 0 < d2 / d1 < 1:
        return m[2] - d2 * d2 / den, tv
    return mean, tv


def normalize_to_zero_limit(profile: RadialProfile, tv_gate: float = TV_GATE) -> RadialProfile:
    """Shift u by its limit at infinity so that u → 0; the limit goes to meta['limit']."""
    ell, tv = tail_limit(profile, tv_gate)
    out = profile.shifted(ell, limit=ell, tail_variation=tv, normalized=True)
    # inf over the mesh, floored at 0 for superharmonic profiles decreasing to ℓ
    return out


def dyadic_radii(r_lo: float, r_hi: float) -> list[float]:
    k0 = math.ceil(math.log2(r_lo))
    k1 = math.floor(math.log2(r_hi))
    return [2.0 ** k for k in range(k0, k1 + 1)]


def _loglog_fit(radii, values, quantity, bound):
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    rng = (float(radii[0]), float(radii[-1]))
    if np.all(values == 0):
        return DecayFit(-math.inf, 0.0, rng, 0.0, quantity, bound, "pass",
                        tuple(radii), tuple(values))
    if np.any(values <= 0):
        return DecayFit(math.nan, math.nan, rng, math.inf, quantity, bound, "indeterminate",
                        tuple(radii), tuple(values))
    x, y = np.log(radii), np.log(values)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope, icpt = float(coef[0]), float(coef[1])
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    if resid > FIT_RESIDUAL_MAX:
        verdict = "indeterminate"
    else:
        verdict = "pass" if slope <= bound + EXPONENT_SLACK else "fail"
    return DecayFit(slope, math.exp(icpt), rng, resid, quantity, bound, verdict,
                    tuple(radii), tuple(values))


def _default_range(profile, r_min, r_max):
    lo = r_min if r_min is not None else 4.0 * max(profile.length_scale, 1.0)
    hi = r_max if r_max is not None else profile.r_max / 16.0
    radii = dyadic_radii(lo, hi)
    if len(radii) < 8:
        raise ValueError(f"need at least 8 dyadic radii in [{lo:g}, {hi:g}], got {len(radii)}")
    return radii


def _check_dim(profile):
    if not 3 <= profile.dim <= 10:
        raise ValueError("decay bounds are stated for 3 <= N <= 10")


def fit_sup_decay(profile: RadialProfile, r_min: float | None = None,
                  r_max: float | None = None) -> DecayFit:
    """Fit sup_{R <= r <= 2R} |u| ~ C R^γ on a normalized profile.

    Passes when γ <= -N/2 - sqrt(N-1) + 2 + 0.05.
    """
    _check_dim(profile)
    radii = _default_range(profile, r_min, r_max)
    vals = [float(np.max(np.abs(_band(profile, R, 2 * R, 65)))) for R in radii]
    return _loglog_fit(radii, vals, DecayQuantity.SUP_DEVIATION, sup_decay_exponent(profile.dim))


def fit_gradient_tail(profile: RadialProfile, r_min: float | None = None,
                      r_max: float | None = None) -> DecayFit:
    """Fit ∫_{B_2R ∖ B_R} |∇u|² ~ C R^γ; passes when γ <= -2(sqrt(N-1) - 1) + 0.05."""
    _check_dim(profile)
    radii = _default_range(profile, r_min, r_max)
    N, du = profile.dim, profile.du_at
    knots = np.asarray(profile.mesh)
    omega = sphere_area(N)
    vals = [omega * _integrate(lambda r: r ** (N - 1) * du(r) ** 2, R, 2 * R, 1, knots)[0]
            for R in radii]
    return _loglog_fit(radii, vals, DecayQuantity.GRADIENT_TAIL, gradient_tail_exponent(N))


@dataclass(frozen=True)
class L2StarResult:
    value: float
    verdict: str            # finite | divergent | indeterminate
    band_radii: tuple
    band_integrals: tuple
    tail_ratio: float
    extrapolated_tail: float


def l2star_norm(profile: RadialProfile, r_min: float = 1.0) -> L2StarResult:
    """∫|u|^{2N/(N-2)} dx by dyadic bands, with geometric tail extrapolation."""
    N = profile.dim
    if N < 3:
        raise ValueError("critical Sobolev exponent needs N >= 3")
    q = 2.0 * N / (N - 2)
    u = profile.u_at
    knots = np.asarray(profile.mesh)
    omega = sphere_area(N)

    def g(r):
        return r ** (N - 1) * np.abs(u(r)) ** q

    core = omega * _integrate(g, 0.0, r_min, 1, knots)[0]
    radii = dyadic_radii(r_min, profile.r_max / 2)
    bands = [omega * _integrate(g, R, 2 * R, 1, knots)[0] for R in radii]
    total = core + sum(bands)
    if total == 0:
        return L2StarResult(0.0, "finite", tuple(radii), tuple(bands), 0.0, 0.0)
    tail = bands[-4:]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
    if not ratios:
        return L2StarResult(total, "finite", tuple(radii), tuple(bands), 0.0, 0.0)
    rho = float(np.max(ratios))
    if rho < 0.9:
        extra = bands[-1] * rho / (1 - rho)
        return L2StarResult(total + extra, "finite", tuple(radii), tuple(bands), rho, extra)
    verdict = "divergent" if float(np.min(ratios)) >= 0.99 else "indeterminate"
    return L2StarResult(math.inf if verdict == "divergent" else total, verdict,
                        tuple(radii), tuple(bands), rho, math.nan)


@dataclass(frozen=True)
class CAlphaResult:
    R: float
    alpha_hold: float
    seminorm: float          # [u]_{C^α(B_{R/2})}
    mean_abs: float          # ⨍_{B_R} |u|
    ratio: float             # R^α [u]_{α, B_{R/2}} / ⨍_{B_R}|u|, scale invariant
    oscillation_bound: float  # R^{-α} ⨍_{B_R}|u|


def calpha_ratio(profile: RadialProfile, R: float, alpha_hold: float, f=None,
                 n: int = 400) -> CAlphaResult:
    """Hölder seminorm on B_{R/2} against the L¹ average on B_R after rescaling to B_1.

    For radial u the seminorm is attained on a ray, so it reduces to
    sup |u(r1) - u(r2)| / |r1 - r2|^α over radii r1, r2 <= R/2.
    """
    if not 0 < alpha_hold < 1:
        raise ValueError("Hölder exponent must lie in (0, 1)")
    if R > profile.r_max * (1 + 1e-12):
        raise ValueError("R exceeds the profile range")
    if f is not None:
        from .stability import Ball, LinearizedOperator, neg_count
        if neg_count(LinearizedOperator.from_profile(profile, f, Ball(R))):
            raise ValueError(f"profile is not stable on B_{R:g}")
    N = profile.dim
    s = np.linspace(0.0, 1.0, n) ** 2 * (R / 2)
    v = profile.u_at(s)
    du = np.abs(v[:, None] - v[None, :])
    dr = np.abs(s[:, None] - s[None, :])
    np.fill_diagonal(dr, np.inf)
    semi = float(np.max(du / dr ** alpha_hold))
    knots = np.asarray(profile.mesh)
    mass = _integrate(lambda r: r ** (N - 1) * np.abs(profile.u_at(r)), 0.0, R, 1, knots)[0]
    mean = N * mass / R ** N
    if mean <= 0:
        raise ValueError("zero L¹ average: ratio indeterminate")
    return CAlphaResult(R, alpha_hold, semi, mean, R ** alpha_hold * semi / mean,
                        R ** (-alpha_hold) * mean)
