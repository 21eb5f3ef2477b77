"""Core domain types: nonlinearities, radial profiles, test functions, reports.

Nothing in here integrates an ODE or solves an eigenproblem; the numerical
modules build on these containers.  All containers are immutable after
construction (numpy arrays are flagged read-only).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

__all__ = [
    "EllipticaError", "ProfileError",
    "SignKind", "Smoothness", "Nonlinearity", "make_builtin_nonlinearity",
    "RadialProfile", "validate_profile", "ResidualReport",
    "Power", "Constant", "LogCap", "Linear", "Zero", "TestFunction",
    "SpectralReport", "Disk", "Box", "BoundaryCondition", "GridSolution2D",
    "DecayQuantity", "DecayFit",
    "sphere_area", "ball_volume", "alpha_exponent", "sup_decay_exponent",
    "gradient_tail_exponent", "hermite_second_derivative",
]


class EllipticaError(Exception):
    """Base class for all package errors."""


class ProfileError(EllipticaError, ValueError):
    """Malformed radial profile (mesh ordering, NaNs, too few points)."""


# ---------------------------------------------------------------------------
# geometry and exponent arithmetic
# ---------------------------------------------------------------------------

def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def ball_volume(N: int, R: float = 1.0) -> float:
    return sphere_area(N) * R ** N / N


def alpha_exponent(N: float) -> float:
    """N/2 + sqrt(N-1) - 2, the power used in the outer test function."""
    return N / 2.0 + math.sqrt(N - 1.0) - 2.0


def sup_decay_exponent(N: float) -> float:
    """Sharp pointwise decay exponent -N/2 - sqrt(N-1) + 2."""
    return -N / 2.0 - math.sqrt(N - 1.0) + 2.0


def gradient_tail_exponent(N: float) -> float:
    """Sharp exponent -2(sqrt(N-1) - 1) of the exterior Dirichlet energy."""
    return -2.0 * (math.sqrt(N - 1.0) - 1.0)


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------

class SignKind(enum.Enum):
    NONNEGATIVE = "nonnegative"
    NONNEGATIVE_THEN_NONPOSITIVE = "nonnegative_then_nonpositive"
    NONPOSITIVE = "nonpositive"
    SIGN_CHANGING = "sign_changing"


class Smoothness(enum.Enum):
    C11 = "C11"
    C21 = "C21"
    C31 = "C31"


Scalar = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Nonlinearity:
    """A right-hand side f of -Δu = f(u) together with its derivatives.

    ``sign_change_at`` is the switching point z for the
    NONNEGATIVE_THEN_NONPOSITIVE class.  ``check_range`` is the interval on
    which the sign class and derivative consistency are spot-checked.
    """

    name: str
    eval: Scalar
    deriv1: Scalar
    deriv2: Optional[Scalar] = None
    deriv3: Optional[Scalar] = None
    sign_class: SignKind = SignKind.SIGN_CHANGING
    zeros: tuple[float, ...] = ()
    smoothness: Smoothness = Smoothness.C11
    sign_change_at: Optional[float] = None
    check_range: tuple[float, float] = (-2.0, 2.0)
    params: dict = field(default_factory=dict)
    kinks: tuple[float, ...] = ()     # points where some derivative is not C^1

    def __call__(self, t):
        return self.eval(t)

    def check_invariants(self, n: int = 401) -> None:
        """Spot-check sign class, listed zeros and derivative consistency.

        Raises EllipticaError on the first violated invariant.
        """
        lo, hi = self.check_range
        t = np.linspace(lo, hi, n)
        ft = np.asarray(self.eval(t), dtype=float)
        if self.sign_class is SignKind.NONNEGATIVE and np.any(ft < 0):
            raise EllipticaError(f"{self.name}: negative value in declared range")
        if self.sign_class is SignKind.NONPOSITIVE and np.any(ft > 0):
            raise EllipticaError(f"{self.name}: positive value in declared range")
        for t0 in self.zeros:
            if abs(float(self.eval(np.float64(t0)))) > 1e-12 * (1.0 + abs(t0)):
                raise EllipticaError(f"{self.name}: listed zero {t0} is not a root")
        chain = [self.eval, self.deriv1, self.deriv2, self.deriv3]
        for k in range(1, 4):
            if chain[k] is None:
                break
            err = derivative_mismatch(chain[k - 1], chain[k], t, self.kinks)
            if err > 1e-6:
                raise EllipticaError(
                    f"{self.name}: derivative {k} disagrees with centered "
                    f"differences (relative error {err:.2e})")


def derivative_mismatch(g: Scalar, dg: Scalar, t: np.ndarray, kinks=()) -> float:
    """Max relative error of dg against centered differences of g.

    Step h = 1e-5 (1 + |t|).  A stencil straddling a point where g is not
    C^2 carries an O(h) error that cannot be told apart from a wrong
    derivative, so such stencils are skipped: those containing a declared
    kink, and those whose one-sided slopes disagree.  The comparison is
    normalised by 1 + |dg|.
    """
    t = np.asarray(t, dtype=float)
    h = 1e-5 * (1.0 + np.abs(t))
    gp, gm, g0 = g(t + h), g(t - h), g(t)
    fd = (gp - gm) / (2 * h)
    right, left = (gp - g0) / h, (g0 - gm) / h
    smooth = np.abs(right - left) <= 1e-3 * (1.0 + np.abs(fd))
    for k in kinks:
        smooth &= np.abs(t - k) > 2 * h
    d = np.asarray(dg(t), dtype=float)
    if not np.any(smooth):
        return 0.0
    rel = np.abs(fd - d)[smooth] / (1.0 + np.abs(d[smooth]))
    return float(rel.max())


def _exp(t):
    return np.exp(t)


def _pos_power(t, p, shift=0.0, k=0):
    # k-th derivative of ((t - shift)^+)^p
    s = np.maximum(np.asarray(t, dtype=float) - shift, 0.0)
    coef = 1.0
    for j in range(k):
        coef *= p - j
    if p - k == 0:
        return coef * (s > 0)
    return coef * s ** (p - k)


def _allen_cahn(t, k=0):
    t = np.asarray(t, dtype=float)
    if k == 0:
        return t - t ** 3
    if k == 1:
        return 1.0 - 3.0 * t ** 2
    if k == 2:
        return -6.0 * t
    return -6.0 * np.ones_like(t)


def _const(t, c=0.0):
    return np.full_like(np.asarray(t, dtype=float), c)


def _smoothness_for_power(p: float, clip: bool) -> Smoothness:
    # (t^+)^p is C^{k,1} near the kink for p >= k + 1
    if not clip or p >= 4:
        return Smoothness.C31
    if p >= 3:
        return Smoothness.C21
    return Smoothness.C11


def make_builtin_nonlinearity(name: str, p: float | None = None,
                              beta: float | None = None,
                              c: float | None = None) -> Nonlinearity:
    """Build one of the standard nonlinearities.

    ``name`` is one of ``exp``, ``power`` (f = (t^+)^p), ``truncated``
    (f = ((t - beta)^+)^p), ``allen_cahn`` (f = t - t^3) and ``constant``
    (f ≡ c).  Power-type nonlinearities use the positive part so that they
    stay in the nonnegative class on the whole line.
    """
    key = name.lower().replace("-", "_")
    if key == "exp":
        return Nonlinearity("exp", _exp, _exp, _exp, _exp,
                            SignKind.NONNEGATIVE, (), Smoothness.C31,
                            check_range=(-5.0, 5.0))
    if key in ("power", "truncated"):
        if p is None or not p > 1:
            raise ValueError(f"{key} nonlinearity needs p > 1, got {p}")
        shift = 0.0
        if key == "truncated":
            if beta is None or not beta > 0:
                raise ValueError(f"truncated nonlinearity needs beta > 0, got {beta}")
            shift = float(beta)
        derivs = [partial(_pos_power, p=float(p), shift=shift, k=k) for k in range(4)]
        # derivatives beyond the smoothness class are not exposed
        sm = _smoothness_for_power(p, clip=True)
        nder = {Smoothness.C11: 1, Smoothness.C21: 2, Smoothness.C31: 3}[sm]
        d2 = derivs[2] if nder >= 2 else None
        d3 = derivs[3] if nder >= 3 else None
        label = f"power({p:g})" if key == "power" else f"truncated({p:g},{shift:g})"
        return Nonlinearity(label, derivs[0], derivs[1], d2, d3,
                            SignKind.NONNEGATIVE, (shift,), sm,
                            check_range=(shift - 2.0, shift + 2.0),
                            params={"p": float(p), "beta": shift}, kinks=(shift,))
    if key == "allen_cahn":
        d = [partial(_allen_cahn, k=k) for k in range(4)]
        return Nonlinearity("allen_cahn", d[0], d[1], d[2], d[3],
                            SignKind.SIGN_CHANGING, (-1.0, 0.0, 1.0), Smoothness.C31)
    if key == "constant":
        if c is None:
            raise ValueError("constant nonlinearity needs c")
        zero = partial(_const, c=0.0)
        if c > 0:
            sign = SignKind.NONNEGATIVE
        elif c < 0:
            sign = SignKind.NONPOSITIVE
        else:
            sign = SignKind.NONNEGATIVE
        # f ≡ 0 vanishes everywhere; 0 stands in as the representative root
        zeros = (0.0,) if c == 0 else ()
        return Nonlinearity(f"constant({c:g})", partial(_const, c=float(c)), zero,
                            zero, zero, sign, zeros, Smoothness.C31,
                            params={"c": float(c)})
    raise ValueError(f"unknown nonlinearity {name!r}")


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RadialProfile:
    """Samples (r, u, ∂u/∂r) of a radial function in dimension ``dim``.

    ``d2u`` is optional; when the producer knows u'' (the shooting solver
    does, from the ODE) it is used to interpolate u' to fourth order.
    """

    dim: int
    mesh: np.ndarray
    u: np.ndarray
    du: np.ndarray
    center_value: float
    inf_estimate: float
    meta: dict = field(default_factory=dict)
    d2u: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("mesh", "u", "du"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.d2u is not None:
            object.__setattr__(self, "d2u", _frozen(self.d2u))
        r = self.mesh
        if r.ndim != 1 or not (len(r) == len(self.u) == len(self.du)):
            raise ProfileError("mesh, u and du must be 1-d arrays of equal length")
        if len(r) < 2:
            raise ProfileError("profile needs at least two mesh points")
        if r[0] != 0.0 and self.dim > 1:
            raise ProfileError("radial mesh must start at r = 0")
        if np.any(np.diff(r) <= 0):
            raise ProfileError("mesh must be strictly increasing")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.du))):
            raise ProfileError("u and du must be finite")
        # for N = 1 the origin is not a singular point (odd profiles allowed)
        if self.dim > 1 and self.du[0] != 0.0:
            raise ProfileError("radial regularity requires du[0] = 0")

    @property
    def r_max(self) -> float:
        return float(self.mesh[-1])

    @property
    def length_scale(self) -> float:
        return float(self.meta.get("length_scale", 1.0))

    @cached_property
    def _u_interp(self):
        return CubicHermiteSpline(self.mesh, self.u, self.du, extrapolate=False)

    @cached_property
    def _du_interp(self):
        d2 = self.d2u
        if d2 is None:
            d2 = hermite_second_derivative(self.mesh, self.u, self.du)
        return CubicHermiteSpline(self.mesh, self.du, d2, extrapolate=False)

    def u_at(self, r):
        """Interpolated u(r); NaN outside the mesh."""
        return self._u_interp(r)

    def du_at(self, r):
        return self._du_interp(r)

    def shifted(self, c: float, **meta) -> "RadialProfile":
        """Profile of u - c (same mesh)."""
        m = dict(self.meta)
        m.update(meta)
        return RadialProfile(self.dim, self.mesh, self.u - c, self.du,
                             self.center_value - c, self.inf_estimate - c, m,
                             self.d2u)

    def truncated(self, r_max: float) -> "RadialProfile":
        k = int(np.searchsorted(self.mesh, r_max, side="right"))
        k = max(k, 2)
        d2 = None if self.d2u is None else self.d2u[:k]
        return RadialProfile(self.dim, self.mesh[:k], self.u[:k], self.du[:k],
                             self.center_value, self.inf_estimate, dict(self.meta), d2)


def hermite_second_derivative(x, u, du) -> np.ndarray:
    """Fourth-order u'' from samples of u and u' on a nonuniform mesh.

    At every point the quintic Hermite interpolant through three
    consecutive nodes (values and slopes) is differentiated twice.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    n = len(x)
    if n < 3:
        raise ProfileError("need at least three points for u''")
    centers = np.arange(n)
    # stencil (j-1, j, j+1), shifted inward at both ends
    left = np.clip(centers - 1, 0, n - 3)
    idx = left[:, None] + np.arange(3)[None, :]
    h = (x[idx[:, 2]] - x[idx[:, 0]]) / 2.0
    s = (x[idx] - x[centers][:, None]) / h[:, None]
    k = np.arange(6)
    # rows: p(s_j) = u_j, p'(s_j) = h du_j in scaled variable
    V = s[:, :, None] ** k[None, None, :]
    dV = np.where(k[None, None, :] > 0,
                  k[None, None, :] * s[:, :, None] ** np.maximum(k - 1, 0)[None, None, :], 0.0)
    A = np.concatenate([V, dV], axis=1)
    b = np.concatenate([u[idx], du[idx] * h[:, None]], axis=1)
    coef = np.linalg.solve(A, b[..., None])[..., 0]
    return 2.0 * coef[:, 2] / h ** 2


@dataclass(frozen=True)
class ResidualReport:
    residual: np.ndarray
    max_residual: float
    l2_residual: float
    tol: float
    passed: bool


def validate_profile(p: RadialProfile, f: Nonlinearity, tol: float) -> ResidualReport:
    """Residual of u'' + (N-1)/r u' + f(u) on the stored mesh.

    u'' is recovered by Hermite differences of the stored (u, u') pairs, so
    the check is independent of whatever produced the profile.  At r = 0 the
    drift term is replaced by its limit (N-1) u''(0).
    """
    r = np.asarray(p.mesh)
    if len(r) < 16:
        raise ProfileError("validate_profile needs at least 16 mesh points")
    if np.any(np.diff(r) <= 0):
        raise ProfileError("mesh is not strictly increasing")
    if np.any(~np.isfinite(p.u)) or np.any(~np.isfinite(p.du)):
        raise ProfileError("profile contains NaN or inf")
    N = p.dim
    d2 = hermite_second_derivative(r, p.u, p.du)
    drift = np.empty_like(d2)
    nz = r != 0
    drift[nz] = (N - 1) * p.du[nz] / r[nz]
    drift[~nz] = (N - 1) * d2[~nz]
    res = d2 + drift + f(np.asarray(p.u))
    # trapezoid L2 norm with the radial weight dropped (per unit length)
    l2 = math.sqrt(float(np.trapezoid(res ** 2, r)) / max(r[-1] - r[0], 1e-300))
    mx = float(np.max(np.abs(res)))
    res = _frozen(res)
    return ResidualReport(res, mx, l2, tol, mx <= tol)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Power:
    a: float
    k: float

    def value(self, r):
        return self.a * np.power(r, self.k)

    def deriv(self, r):
        if self.k == 0:
            return np.zeros_like(r)
        return self.a * self.k * np.power(r, self.k - 1)

    def rderiv(self, r):
        """r ζ'(r) in closed form (k times the value)."""
        return self.k * self.value(r)


@dataclass(frozen=True)
class Constant:
    c: float

    def value(self, r):
        return np.full_like(r, self.c)

    def deriv(self, r):
        return np.zeros_like(r)

    def rderiv(self, r):
        return np.zeros_like(r)


@dataclass(frozen=True)
class LogCap:
    """c ln(r / R2^2) / ln(1 / R2): equals c at r = R2 and 0 at r = R2^2."""

    c: float
    R2: float

    def value(self, r):
        return self.c * np.log(r / self.R2 ** 2) / math.log(1.0 / self.R2)

    def deriv(self, r):
        return self.c / (r * math.log(1.0 / self.R2))

    def rderiv(self, r):
        return np.full_like(r, self.c / math.log(1.0 / self.R2))


@dataclass(frozen=True)
class Linear:
    a: float
    b: float

    def value(self, r):
        return self.a * r + self.b

    def deriv(self, r):
        return np.full_like(r, self.a)

    def rderiv(self, r):
        return self.a * r


@dataclass(frozen=True)
class Zero:
    def value(self, r):
        return np.zeros_like(r)

    def deriv(self, r):
        return np.zeros_like(r)

    def rderiv(self, r):
        return np.zeros_like(r)


@dataclass(frozen=True)
class TestFunction:
    """Piecewise closed-form radial Lipschitz function with compact support.

    ``pieces[0]`` lives on [0, breakpoints[0]), ``pieces[i]`` on
    [breakpoints[i-1], breakpoints[i]) and the last piece on
    [breakpoints[-1], ∞); the last piece must be Zero.
    """

    __test__ = False  # not a pytest class

    breakpoints: tuple[float, ...]
    pieces: tuple
    alpha: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(bp) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be increasing")
        if not isinstance(self.pieces[-1], Zero):
            raise ValueError("final piece must be Zero (compact support)")
        for b, left, right in zip(bp, self.pieces, self.pieces[1:]):
            vl = float(left.value(np.array(b)))
            vr = float(right.value(np.array(b)))
            if abs(vl - vr) > 1e-12 * max(1.0, abs(vl), abs(vr)):
                raise ValueError(f"test function jumps at r = {b}: {vl} vs {vr}")

    @property
    def support(self) -> tuple[float, float]:
        lo = 0.0
        for b, piece in zip(self.breakpoints, self.pieces):
            if isinstance(piece, Zero):
                lo = b
            else:
                break
        return lo, self.breakpoints[-1]

    def panels(self) -> list[tuple[float, float, object]]:
        """(lo, hi, piece) for every nonzero piece."""
        edges = (0.0,) + self.breakpoints
        out = []
        for lo, hi, piece in zip(edges, edges[1:], self.pieces):
            if not isinstance(piece, Zero):
                out.append((lo, hi, piece))
        return out

    def _dispatch(self, r, which):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.breakpoints, r, side="right")
        out = np.zeros_like(r)
        for i, piece in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = getattr(piece, which)(r[m])
        return out

    def value(self, r):
        return self._dispatch(r, "value")

    def deriv(self, r):
        return self._dispatch(r, "deriv")

    def rderiv(self, r):
        """r ζ'(r), evaluated piecewise in closed form."""
        return self._dispatch(r, "rderiv")

    def describe(self) -> dict:
        return {
            "label": self.label,
            "alpha": self.alpha,
            "breakpoints": list(self.breakpoints),
            "pieces": [{"type": type(p).__name__, **vars(p)} for p in self.pieces],
        }


# ---------------------------------------------------------------------------
# spectral and grid containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    """Radial-sector spectral data of the linearized operator on balls B_R.

    ``r0_outside`` is the smallest tested inner radius R0 for which the
    operator is nonnegative on every tested annulus (R0, R), or inf.
    """

    dim: int
    radii: tuple[float, ...]
    lambda1: tuple[float, ...]
    neg_count: tuple[int, ...]
    grid_resolution: int
    r0_outside: float = math.inf
    tol_spec: float = 1e-6

    def is_monotone(self, slack: float = 1e-8) -> bool:
        lam = np.asarray(self.lambda1)
        neg = np.asarray(self.neg_count)
        ok_lam = np.all(np.diff(lam) <= slack * (1.0 + np.abs(lam[:-1])))
        return bool(ok_lam and np.all(np.diff(neg) >= 0))

    @property
    def stable_on_all(self) -> bool:
        return all(n == 0 for n in self.neg_count)


@dataclass(frozen=True)
class Disk:
    R: float


@dataclass(frozen=True)
class Box:
    """Centered rectangle [-a, a] x [-b, b]."""

    a: float
    b: float


class BoundaryCondition(enum.Enum):
    DIRICHLET0 = "dirichlet0"
    NEUMANN0 = "neumann0"


@dataclass(frozen=True)
class GridSolution2D:
    """Grid function on the tensor grid x × y (u[i, j] = u(x[i], y[j])).

    For a Disk geometry, nodes outside the disk carry the boundary value 0.
    """

    geometry: object
    h: float
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    bc: BoundaryCondition
    residual_norm: float
    history: tuple[float, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("x", "y", "u"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.u.shape != (len(self.x), len(self.y)):
            raise ValueError("u must have shape (len(x), len(y))")

    def inside(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        if isinstance(self.geometry, Disk):
            return X ** 2 + Y ** 2 < self.geometry.R ** 2
        return np.ones_like(X, dtype=bool)


class DecayQuantity(enum.Enum):
    SUP_DEVIATION = "sup_deviation"
    GRADIENT_TAIL = "gradient_tail"


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    constant: float
    fit_range: tuple[float, float]
    residual: float
    quantity: DecayQuantity
    bound: float = math.nan
    verdict: str = "indeterminate"
    radii: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"
