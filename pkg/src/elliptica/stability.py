"""Radial-sector spectral analysis of the linearized operator -Δ - f'(u).

The quadratic form

    Q(φ) = ∫ (φ'² - V φ²) r^{N-1} dr,   V = f'(u(r)),

is discretized with piecewise-linear elements (exact edge averages of the
weight r^{N-1}) and a lumped mass matrix.  Symmetrizing by the square root
of the mass gives a symmetric tridiagonal matrix whose eigenvalues are the
generalized eigenvalues of Q against ∫ φ² r^{N-1}.  Eigenvalues are located
by Sturm-sequence bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .emden import SingularSolution, singular_solution
from .model import EllipticaError, Nonlinearity, RadialProfile, SpectralReport

__all__ = [
    "Ball", "Annulus", "MeshTooCoarse", "NoThreshold", "LinearizedOperator",
    "sturm_count", "lambda1", "neg_count", "morse_index_radial",
    "outside_radius", "singular_operator", "hardy_power_threshold", "singular_is_stable",
    "ComparisonResult", "comparison_stability_test", "quadratic_form",
]

TOL_SPEC = 1e-6


class MeshTooCoarse(EllipticaError):
    pass


class NoThreshold(EllipticaError):
    """No exponent makes the singular power solution stable in this dimension."""


@dataclass(frozen=True)
class Ball:
    R: float


@dataclass(frozen=True)
class Annulus:
    """R1 < r < R2 with Dirichlet data on both spheres.

    For N = 1 a negative R1 is allowed and describes the interval (R1, R2).
    """

    R1: float
    R2: float


def _power_diff(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    # (b^N - a^N) / N without cancellation for nearby positive a, b
    out = (b ** N - a ** N) / N
    pos = a > 0
    if np.any(pos):
        aa, bb = a[pos], b[pos]
        out[pos] = aa ** N * np.expm1(N * np.log1p((bb - aa) / aa)) / N
    return out


def _nodes(N: int, domain, resolution: int, scale: float) -> tuple[np.ndarray, int, int]:
    """Mesh nodes plus the index range [i0, i1) of the unknowns."""
    n = int(resolution)
    if isinstance(domain, Ball):
        # r = ℓ sinh(s): uniform near the origin, geometric far out
        S = math.asinh(domain.R / scale)
        r = scale * np.sinh(np.linspace(0.0, S, n + 1))
        r[-1] = domain.R
        return r, 0, n
    R1, R2 = domain.R1, domain.R2
    if not R2 > R1:
        raise ValueError("annulus needs R1 < R2")
    if R1 > 0:
        r = R1 * (R2 / R1) ** (np.arange(n + 1) / n)
        r[0], r[-1] = R1, R2
    elif N == 1:
        r = np.linspace(R1, R2, n + 1)
    else:
        raise ValueError("annulus inner radius must be positive for N > 1")
    return r, 1, n


@dataclass(frozen=True)
class LinearizedOperator:
    """Symmetric tridiagonal form of -Δ_rad - V with Dirichlet outer data.

    ``diag`` and ``offdiag`` hold M^{-1/2}(K - VM)M^{-1/2}; ``stiff_diag``,
    ``stiff_off`` and ``mass`` keep the unsymmetrized pieces so the discrete
    quadratic form can be evaluated directly.
    """

    dim: int
    domain: object
    nodes: np.ndarray
    potential: np.ndarray
    mass: np.ndarray
    stiff_diag: np.ndarray
    stiff_off: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray
    resolution: int

    @classmethod
    def from_potential(cls, N: int, V: Callable, domain, resolution: int = 2048,
                       scale: float = 1.0) -> "LinearizedOperator":
        if resolution < 200:
            raise MeshTooCoarse(f"resolution {resolution} < 200")
        r, i0, i1 = _nodes(N, domain, resolution, scale)
        h = np.diff(r)
        w = _power_diff(r[:-1], r[1:], N) / h       # mean of r^{N-1} per edge
        c = w / h
        mid = 0.5 * (r[:-1] + r[1:])
        lo = np.concatenate([[r[0]], mid])
        hi = np.concatenate([mid, [r[-1]]])
        mass_all = _power_diff(lo, hi, N)
        kd_all = np.zeros_like(r)
        kd_all[:-1] += c
        kd_all[1:] += c
        idx = np.arange(i0, i1)
        rn = r[idx]
        pot = np.asarray(V(rn), dtype=float) * np.ones_like(rn)
        m = mass_all[idx]
        kd = kd_all[idx]
        ko = -c[idx[:-1]]
        d = kd / m - pot
        e = ko / np.sqrt(m[:-1] * m[1:])
        return cls(N, domain, r, pot, m, kd, ko, d, e, len(idx))

    @classmethod
    def from_profile(cls, profile: RadialProfile, f: Nonlinearity, domain,
                     resolution: int = 2048, scale: float | None = None) -> "LinearizedOperator":
        outer = domain.R if isinstance(domain, Ball) else domain.R2
        if outer > profile.r_max * (1 + 1e-12):
            raise ValueError(f"domain radius {outer} exceeds profile range {profile.r_max}")
        if scale is None:
            scale = min(profile.length_scale, outer / 8.0)

        def V(r):
            return f.deriv1(profile.u_at(np.minimum(np.abs(r), profile.r_max)))

        return cls.from_potential(profile.dim, V, domain, resolution, scale)

    def quadratic_form(self, phi) -> float:
        """φᵀ(K - V M)φ for a vector on the unknown nodes."""
        phi = np.asarray(phi, dtype=float)
        val = np.dot(self.stiff_diag, phi ** 2) + 2.0 * np.dot(self.stiff_off, phi[:-1] * phi[1:])
        return float(val - np.dot(self.potential * self.mass, phi ** 2))


def quadratic_form(op: LinearizedOperator, phi) -> float:
    return op.quadratic_form(phi)


def sturm_count(diag: Sequence[float], off_sq: Sequence[float], x: float) -> int:
    """Number of eigenvalues strictly below x (LDLᵀ inertia)."""
    count = 0
    q = diag[0] - x
    if q < 0:
        count += 1
    for i in range(1, len(diag)):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off_sq[i - 1] / q
        if q < 0:
            count += 1
    return count


def _lists(op: LinearizedOperator):
    return op.diag.tolist(), (op.offdiag ** 2).tolist()


def neg_count(op: LinearizedOperator, tol_spec: float = TOL_SPEC) -> int:
    """Eigenvalues below -tol_spec: the radial Morse index on the domain."""
    d, e2 = _lists(op)
    return sturm_count(d, e2, -tol_spec)


def lambda1(op: LinearizedOperator, tol: float = 1e-10, check_mesh: bool = True) -> float:
    """Lowest eigenvalue by bisection on the Sturm count."""
    d, e2 = _lists(op)
    a = np.abs(op.offdiag)
    rad = np.zeros_like(op.diag)
    rad[:-1] += a
    rad[1:] += a
    lo = float(np.min(op.diag - rad)) - 1e-12
    hi = float(np.min(op.diag)) + 1e-12
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)) and hi - lo > 0:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if sturm_count(d, e2, mid) >= 1:
            hi = mid
        else:
            lo = mid
    lam = 0.5 * (lo + hi)
    if check_mesh:
        nodes = sturm_count(d, e2, 0.0)
        if op.resolution < 20 * (nodes + 1):
            raise MeshTooCoarse(
                f"{op.resolution} points for {nodes} sign changes of the zero-energy state")
    return lam


def _profile_radii(profile, radii):
    radii = sorted(float(R) for R in radii)
    if radii[-1] > profile.r_max * (1 + 1e-12):
        raise ValueError("tested radii exceed the profile range")
    return radii


def outside_radius(profile: RadialProfile, f: Nonlinearity, radii: Sequence[float],
                   resolution: int = 2048, tol_spec: float = TOL_SPEC,
                   rel_precision: float = 0.01) -> float:
    """Smallest R0 with the operator nonnegative on Annulus(R0, R) for all tested R.

    Annuli shrink as R0 grows, so nonnegativity is monotone in R0 and the
    smallest admissible R0 is located by bisection in log R0 against the
    largest tested R.  Returns 0 when the whole ball B_Rmax is stable and
    inf when even the outermost annulus is not.
    """
    radii = _profile_radii(profile, radii)
    Rmax = radii[-1]
    ball = LinearizedOperator.from_profile(profile, f, Ball(Rmax), resolution)
    if neg_count(ball, tol_spec) == 0:
        return 0.0

    def stable(R0, R=Rmax):
        op = LinearizedOperator.from_profile(profile, f, Annulus(R0, R), resolution)
        return neg_count(op, tol_spec) == 0

    lo = max(float(profile.mesh[4]), 1e-6 * Rmax)
    hi = 0.5 * Rmax
    if not stable(hi):
        return math.inf
    if stable(lo):
        return lo
    while hi / lo > 1 + rel_precision:
        mid = math.sqrt(lo * hi)
        if stable(mid):
            hi = mid
        else:
            lo = mid
    for R in radii:
        if R > 2 * hi and not stable(hi, R):
            return math.inf
    return hi


def morse_index_radial(profile: RadialProfile, f: Nonlinearity, radii: Iterable[float],
                       resolution: int = 2048, tol_spec: float = TOL_SPEC,
                       with_outside: bool = True) -> SpectralReport:
    """λ1 and the negative-eigenvalue count on each ball B_R, R in ``radii``."""
    radii = _profile_radii(profile, radii)
    lam, neg = [], []
    for R in radii:
        op = LinearizedOperator.from_profile(profile, f, Ball(R), resolution)
        lam.append(lambda1(op))
        neg.append(neg_count(op, tol_spec))
    r0 = outside_radius(profile, f, radii, resolution, tol_spec) if with_outside else math.inf
    return SpectralReport(profile.dim, tuple(radii), tuple(lam), tuple(neg),
                          int(resolution), r0, tol_spec)


def singular_operator(kind: str, N: int, domain, resolution: int = 4096,
                      p: float | None = None) -> LinearizedOperator:
    """Linearization about the singular solution u_s on an annulus."""
    us = singular_solution(kind, N, p)
    return LinearizedOperator.from_potential(N, us.potential, domain, resolution)


# ---------------------------------------------------------------------------
# Hardy thresholds
# ---------------------------------------------------------------------------

def _power_gap(p: float, N: int) -> float:
    # p f'-coefficient of the singular solution minus the Hardy constant
    m = 2.0 / (p - 1.0)
    return p * m * (N - 2 - m) - (N - 2) ** 2 / 4.0


def hardy_power_threshold(N: int, tol: float = 1e-8) -> float:
    """Smallest p >= (N+2)/(N-2) for which u_s = c_p r^{-2/(p-1)} is stable.

    Stability of u_s on R^N is equivalent, through Hardy's inequality with
    constant (N-2)²/4, to p c_p^{p-1} <= (N-2)²/4; the gap is bisected.
    """
    if N <= 10:
        raise NoThreshold(f"no stable singular power solution above the critical exponent for N = {N}")
    lo = (N + 2.0) / (N - 2.0)
    hi = 2.0 * lo
    while _power_gap(hi, N) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise NoThreshold(f"gap stays positive for N = {N}")
    if _power_gap(lo, N) <= 0:
        raise NoThreshold("singular solution already stable at the critical exponent")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _power_gap(mid, N) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def singular_is_stable(kind: str, N: int, p: float | None = None) -> bool:
    """Exact-arithmetic Hardy comparison: f'(u_s) r² <= (N-2)²/4."""
    hardy = Fraction(N - 2) ** 2 / 4
    if kind == "exp":
        return 2 * Fraction(N - 2) <= hardy
    P = Fraction(p)
    m = 2 / (P - 1)
    return P * m * (N - 2 - m) <= hardy


@dataclass(frozen=True)
class ComparisonResult:
    """Outcome of the u <= u_s comparison.

    ``supports_stability`` is a heuristic label: a profile lying below a
    stable singular solution is reported as evidence of stability, not as a
    proof.
    """

    below_singular: bool
    max_excess: float
    first_violation: float
    singular_stable: bool
    supports_stability: bool
    heuristic: bool = True


def comparison_stability_test(profile: RadialProfile, singular: SingularSolution,
                              rel_tol: float = 1e-9) -> ComparisonResult:
    """u <= u_s at every mesh point r > 0, up to rel_tol (1 + |u_s|).

    The tolerance absorbs solver round-off where u approaches u_s from below.
    """
    if profile.dim != singular.dim:
        raise ValueError("profile and singular solution live in different dimensions")
    r = np.asarray(profile.mesh)
    keep = r > 0
    us = singular.u(r[keep])
    gap = np.asarray(profile.u)[keep] - us
    bad = gap > rel_tol * (1.0 + np.abs(us))
    below = not bool(np.any(bad))
    first = float(r[keep][bad][0]) if not below else math.nan
    sing_ok = singular_is_stable(singular.kind, singular.dim, singular.p)
    return ComparisonResult(below, float(np.max(gap)), first, sing_ok, below and sing_ok)
