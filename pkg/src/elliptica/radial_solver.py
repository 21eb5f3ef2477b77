"""Radial shooting for u'' + (N-1)/r u' + f(u) = 0 and 1D monotone profiles."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import RK45, OdeSolution, solve_ivp

from .model import (EllipticaError, Nonlinearity, RadialProfile,
                    validate_profile)

__all__ = [
    "BlowUp", "StepFailure", "NoMonotoneConnection", "ShootingParams",
    "natural_length", "series_start", "radial_mesh", "shoot",
    "BranchSample", "classify_tail", "find_bounded_stable_branch",
    "halfspace_profile_1d",
]


class BlowUp(EllipticaError):
    """|u| crossed the overflow guard before r_max."""

    def __init__(self, radius: float, partial: Optional[RadialProfile] = None):
        super().__init__(f"solution blows up at r = {radius:.9g}")
        self.radius = radius
        self.partial = partial


class StepFailure(EllipticaError):
    """Adaptive stepper could not proceed (step underflow or step budget)."""

    def __init__(self, radius: float, message: str):
        super().__init__(f"stepper failed at r = {radius:.9g}: {message}")
        self.radius = radius


class NoMonotoneConnection(EllipticaError):
    """The first integral admits no monotone orbit from 0 to the target."""


@dataclass(frozen=True)
class ShootingParams:
    """Initial data u(0) = a, u'(0) = 0 and integration controls.

    ``series_radius`` of None picks 1e-3 times the natural length of the
    problem (see :func:`natural_length`), capped at 1e-3 r_max.
    """

    dim: int
    center_value: float
    r_max: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    series_radius: Optional[float] = None
    max_steps: int = 500_000
    mesh_ratio: float = 1.05
    blowup_guard: float = 1e8

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not (0 < self.rel_tol <= 1e-2 and 0 < self.abs_tol <= 1e-2):
            raise ValueError("tolerances must lie in (0, 1e-2]")
        if self.series_radius is not None and not (0 < self.series_radius < 1e-2 * self.r_max):
            raise ValueError("series radius must satisfy 0 < r0 << r_max")
        if self.mesh_ratio <= 1.0:
            raise ValueError("mesh ratio must exceed 1")


def natural_length(f: Nonlinearity, a: float, N: int) -> float:
    """Radius over which u moves by about max(|a|, 1) under the series start."""
    fa = abs(float(f(np.float64(a))))
    if fa == 0.0:
        return math.inf
    return math.sqrt(2.0 * N * max(abs(a), 1.0) / fa)


def series_start(f: Nonlinearity, a: float, N: int, r):
    """u, u' from a - f(a) r²/(2N) + f'(a) f(a) r⁴ / (8N(N+2))."""
    r = np.asarray(r, dtype=float)
    fa = float(f(np.float64(a)))
    fpa = float(f.deriv1(np.float64(a)))
    b = -fa / (2.0 * N)
    c = fpa * fa / (8.0 * N * (N + 2.0))
    return a + b * r ** 2 + c * r ** 4, 2 * b * r + 4 * c * r ** 3


def radial_mesh(r0: float, r_max: float, ratio: float) -> np.ndarray:
    """0, three series points inside (0, r0), then geometric from r0 to r_max."""
    n = max(int(math.ceil(math.log(r_max / r0) / math.log(ratio))), 1)
    outer = r0 * (r_max / r0) ** (np.arange(n + 1) / n)
    outer[-1] = r_max
    return np.concatenate([[0.0], r0 * np.array([0.25, 0.5, 0.75]), outer])


def _bisect_guard(interp, lo, hi, guard):
    # |u| crosses guard inside [lo, hi]; locate to 1e-6 relative
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if abs(interp(mid)[0]) >= guard:
            hi = mid
        else:
            lo = mid
    return hi


def shoot(f: Nonlinearity, sp: ShootingParams) -> RadialProfile:
    """Integrate the radial ODE from u(0) = a, u'(0) = 0 out to r_max.

    A Taylor start covers [0, r0]; beyond it an embedded Dormand–Prince
    5(4) pair advances with adaptive steps.  Raises BlowUp when |u| passes
    ``sp.blowup_guard`` and StepFailure when the stepper stalls.
    """
    N, a = sp.dim, float(sp.center_value)
    L = natural_length(f, a, N)
    r0 = sp.series_radius
    if r0 is None:
        r0 = 1e-3 * min(L, sp.r_max)
    u0, du0 = series_start(f, a, N, r0)

    def rhs(r, y):
        return np.array([y[1], -(N - 1) / r * y[1] - float(f(y[0]))])

    solver = RK45(rhs, r0, np.array([float(u0), float(du0)]), sp.r_max,
                  rtol=sp.rel_tol, atol=sp.abs_tol)
    ts, interps = [r0], []
    steps = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise StepFailure(solver.t, str(msg))
            interp = solver.dense_output()
            if not np.all(np.isfinite(solver.y)) or abs(solver.y[0]) >= sp.blowup_guard:
                radius = _bisect_guard(interp, solver.t_old, solver.t, sp.blowup_guard)
                partial = None
                if interps:
                    partial = _assemble(f, sp, a, r0, ts, interps, ts[-1], L)
                raise BlowUp(radius, partial)
            ts.append(solver.t)
            interps.append(interp)
            steps += 1
            if steps >= sp.max_steps:
                raise StepFailure(solver.t, "step budget exhausted")
    return _assemble(f, sp, a, r0, ts, interps, sp.r_max, L)


def _assemble(f, sp, a, r0, ts, interps, r_end, L) -> RadialProfile:
    N = sp.dim
    mesh = radial_mesh(r0, r_end, sp.mesh_ratio)
    inner = mesh <= r0
    u = np.empty_like(mesh)
    du = np.empty_like(mesh)
    u[inner], du[inner] = series_start(f, a, N, mesh[inner])
    sol = OdeSolution(ts, interps)
    y = sol(mesh[~inner])
    u[~inner], du[~inner] = y[0], y[1]
    du[0] = 0.0
    d2u = np.empty_like(mesh)
    d2u[0] = -float(f(np.float64(a))) / N
    d2u[1:] = -(N - 1) / mesh[1:] * du[1:] - f(u[1:])
    meta = {
        "source": "shoot",
        "nonlinearity": f.name,
        "center_value": a,
        "r_max": float(r_end),
        "series_radius": float(r0),
        "rel_tol": sp.rel_tol,
        "abs_tol": sp.abs_tol,
        "mesh_ratio": sp.mesh_ratio,
        "length_scale": float(min(L, r_end)),
        "steps": len(interps),
    }
    return RadialProfile(N, mesh, u, du, a, float(np.min(u)), meta, d2u)


# ---------------------------------------------------------------------------
# branch sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchSample:
    """One classified shot.  status is bounded, crossing, drifting or blowup."""

    a: float
    profile: Optional[RadialProfile]
    status: str
    bounded: bool
    limit: float = math.nan
    crossed_zero: bool = False
    blowup_radius: float = math.nan
    message: str = ""


def classify_tail(profile: RadialProfile, f: Nonlinearity, window: float = 0.1,
                  tv_tol: float = 1e-3) -> tuple[str, float, bool]:
    """Classify a completed shot from the last ``window`` fraction of [0, r_max].

    Bounded iff the total variation of u there is at most
    tv_tol (1 + |u(r_max)|); the limit is then estimated by u(r_max).
    """
    R = profile.r_max
    r = np.linspace((1.0 - window) * R, R, 257)
    u = profile.u_at(r)
    tv = float(np.sum(np.abs(np.diff(u))))
    u_end = float(profile.u[-1])
    crossed = False
    for z in f.zeros:
        s = np.sign(profile.u - z)
        # crossing means a strict sign change, not a tangential approach
        if np.any(s[:-1] * s[1:] < 0):
            crossed = True
    bounded = tv <= tv_tol * (1.0 + abs(u_end))
    if bounded:
        return "bounded", u_end, crossed
    du = profile.du[1:]
    turns = np.any(np.sign(du[:-1]) * np.sign(du[1:]) < 0)
    if crossed or turns:
        return "crossing", math.nan, crossed
    return "drifting", math.nan, crossed


def _shoot_and_classify(args):
    f, sp = args
    try:
        prof = shoot(f, sp)
    except BlowUp as exc:
        return BranchSample(sp.center_value, exc.partial, "blowup", False,
                            blowup_radius=exc.radius, message=str(exc))
    except StepFailure as exc:
        return BranchSample(sp.center_value, None, "failed", False, message=str(exc))
    status, limit, crossed = classify_tail(prof, f)
    return BranchSample(sp.center_value, prof, status, status == "bounded", limit, crossed)


def _grid(lo, hi, n):
    if lo > 0 and hi > 0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def find_bounded_stable_branch(f: Nonlinearity, N: int, a_range: tuple[float, float],
                               n_samples: int = 64, r_max: float = 1e6,
                               refine: int = 0, jobs: int = 1,
                               **shoot_kw) -> list[BranchSample]:
    """Sweep center values and classify every shot.

    The grid over ``a_range`` is logarithmic when the range is positive.
    Each ``refine`` round trisects every interval whose end points were
    classified differently.  Shot errors are captured per sample.
    Stability is not decided here; feed bounded profiles to
    :func:`elliptica.stability.morse_index_radial`.
    """
    if N < 3:
        raise ValueError("branch sweeps are defined for N >= 3")
    lo, hi = a_range
    log = lo > 0 and hi > 0

    def run(values):
        tasks = [(f, ShootingParams(N, float(a), r_max, **shoot_kw)) for a in values]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(_shoot_and_classify, tasks))
        return [_shoot_and_classify(t) for t in tasks]

    samples = run(_grid(lo, hi, n_samples))
    for _ in range(refine):
        samples.sort(key=lambda s: s.a)
        new = []
        for s0, s1 in zip(samples, samples[1:]):
            if s0.status != s1.status:
                if log:
                    q = (s1.a / s0.a) ** (1.0 / 3.0)
                    new += [s0.a * q, s0.a * q * q]
                else:
                    d = (s1.a - s0.a) / 3.0
                    new += [s0.a + d, s0.a + 2 * d]
        if not new:
            break
        samples += run(new)
    samples.sort(key=lambda s: s.a)
    return samples


# ---------------------------------------------------------------------------
# one-dimensional monotone profiles
# ---------------------------------------------------------------------------

_GL_X, _GL_W = leggauss(32)


def _integral_of_f(f, lo, hi):
    # ∫_lo^hi f by 32-point Gauss–Legendre; keeps relative accuracy as hi - lo -> 0
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return half * float(np.dot(_GL_W, f(mid + half * _GL_X)))


def halfspace_profile_1d(f: Nonlinearity, c: float, x_max: float,
                         dx: float = 5e-3, check_samples: int = 400,
                         residual_tol: float = 1e-8) -> RadialProfile:
    """Monotone solution of u'' + f(u) = 0 on [0, x_max], u(0) = 0, u -> c.

    Integrates the first integral u' = sqrt(2 (F(c) - F(u))) with F' = f,
    F(0) = 0, which is attracting as u -> c.  The result is stored as a
    one-dimensional profile (dim = 1) on a uniform mesh.
    """
    if not c > 0:
        raise NoMonotoneConnection(f"target value must be positive, got {c}")
    if abs(float(f(np.float64(c)))) > 1e-12 * (1.0 + abs(c)):
        raise NoMonotoneConnection(f"f({c}) != 0, so u cannot settle at {c}")
    ts = np.linspace(0.0, c, check_samples + 1)[1:-1]
    gaps = np.array([_integral_of_f(f, t, c) for t in ts])
    if np.any(gaps <= 0):
        raise NoMonotoneConnection("F(c) <= F(t) for some t in (0, c)")

    def slope(u):
        u = min(u, c)
        return math.sqrt(max(2.0 * _integral_of_f(f, u, c), 0.0))

    sol = solve_ivp(lambda x, y: [slope(y[0])], (0.0, x_max), [0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    if not sol.success:
        raise StepFailure(float(sol.t[-1]), sol.message)
    n = int(round(x_max / dx))
    x = np.linspace(0.0, x_max, n + 1)
    # u' >= 0 exactly; drop ulp-level wobble of the dense interpolant
    u = np.minimum(np.maximum.accumulate(sol.sol(x)[0]), c)
    du = np.array([slope(v) for v in u])
    d2u = -f(u)
    meta = {"source": "halfspace_profile_1d", "nonlinearity": f.name,
            "target": float(c), "x_max": float(x_max), "dx": float(x[1] - x[0]),
            "length_scale": 1.0}
    prof = RadialProfile(1, x, u, du, 0.0, 0.0, meta, d2u)
    rep = validate_profile(prof, f, residual_tol)
    if not rep.passed:
        raise EllipticaError(f"1D profile residual {rep.max_residual:.2e} exceeds {residual_tol}")
    meta["residual_max"] = rep.max_residual
    return prof
