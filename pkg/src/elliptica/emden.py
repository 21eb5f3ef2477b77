"""Emden variables: the scale-invariant radial equations as autonomous ODEs.

Exponential case, t = ln r and v(t) = u(e^t) + 2t:

    v'' + (N-2) v' + e^v - 2(N-2) = 0,        v* = ln 2(N-2).

Power case f(u) = u^p, m = 2/(p-1) and w(t) = r^m u(r):

    w'' + (N-2-2m) w' - m(N-2-m) w + w^p = 0,  w*^{p-1} = m(N-2-m).

The power system follows from u = e^{-mt} w and mp = m + 2; its fixed
point is the singular solution c_p r^{-m}.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .model import RadialProfile

__all__ = ["FixedPointKind", "EmdenSystem", "build_emden", "exact_discriminant",
           "classify_fixed_point", "SingularSolution", "singular_solution",
           "emden_trajectory", "write_trajectory_csv"]


class FixedPointKind(enum.Enum):
    SPIRAL_SINK = "spiral_sink"
    DEGENERATE_NODE = "degenerate_node"
    REAL_SINK = "real_sink"


@dataclass(frozen=True)
class EmdenSystem:
    dim: int
    kind: str
    p: float | None
    fixed_point: float
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    damping: float          # coefficient of v'
    stiffness: float        # linearized restoring coefficient at v*

    def field(self, t, y):
        """Autonomous vector field (v, v')' in Emden variables."""
        v, dv = y
        N = self.dim
        if self.kind == "exp":
            return np.array([dv, -(N - 2) * dv - math.exp(v) + 2 * (N - 2)])
        m = 2.0 / (self.p - 1.0)
        return np.array([dv, -(N - 2 - 2 * m) * dv + m * (N - 2 - m) * v
                         - math.copysign(abs(v) ** self.p, v)])

    def char_poly(self, lam):
        return lam * lam + self.damping * lam + self.stiffness

    def fixed_point_residual(self) -> float:
        return float(np.max(np.abs(self.field(0.0, (self.fixed_point, 0.0)))))


def _check_power(N, p):
    if not N - 2 - 2.0 / (p - 1.0) > 0:
        raise ValueError(f"singular amplitude undefined: need p > N/(N-2), got p = {p}, N = {N}")


def build_emden(kind: str, N: int, p: float | None = None) -> EmdenSystem:
    """Emden system for ``kind`` in {"exp", "power"}; needs N >= 3."""
    if N < 3:
        raise ValueError("Emden reduction is set up for N >= 3")
    if kind == "exp":
        damping = float(N - 2)
        stiffness = 2.0 * (N - 2)
        vstar = math.log(2.0 * (N - 2))
    elif kind == "power":
        if p is None or p <= 1:
            raise ValueError("power kind needs p > 1")
        _check_power(N, p)
        m = 2.0 / (p - 1.0)
        damping = N - 2 - 2 * m
        stiffness = (p - 1.0) * m * (N - 2 - m)
        vstar = (m * (N - 2 - m)) ** (1.0 / (p - 1.0))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    J = np.array([[0.0, 1.0], [-stiffness, -damping]])
    disc = damping ** 2 - 4 * stiffness
    if disc >= 0:
        s = math.sqrt(disc)
        ev = (complex(0.5 * (-damping + s)), complex(0.5 * (-damping - s)))
    else:
        s = math.sqrt(-disc)
        ev = (complex(-0.5 * damping, 0.5 * s), complex(-0.5 * damping, -0.5 * s))
    return EmdenSystem(N, kind, p, vstar, J, ev, damping, stiffness)


def exact_discriminant(kind: str, N: int, p: float | Fraction | None = None) -> Fraction:
    """Discriminant of the linearization in exact rational arithmetic.

    For the exponential case this is (N-2)^2 - 8(N-2); for the power case
    (N-2)^2 - 4 p m (N-2-m) with m = 2/(p-1), where a float p is taken at
    its exact binary value.
    """
    N = Fraction(N)
    if kind == "exp":
        return (N - 2) ** 2 - 8 * (N - 2)
    P = Fraction(p)
    m = 2 / (P - 1)
    return (N - 2) ** 2 - 4 * P * m * (N - 2 - m)


def classify_fixed_point(sys: EmdenSystem) -> FixedPointKind:
    """Spiral sink, degenerate node or real sink from the exact discriminant."""
    d = exact_discriminant(sys.kind, sys.dim, sys.p)
    if d < 0:
        return FixedPointKind.SPIRAL_SINK
    if d == 0:
        return FixedPointKind.DEGENERATE_NODE
    return FixedPointKind.REAL_SINK


@dataclass(frozen=True)
class SingularSolution:
    """Closed-form singular radial solution with u, u', u'' and f."""

    dim: int
    kind: str
    p: float | None
    amplitude: float
    u: Callable
    du: Callable
    d2u: Callable
    f: Callable
    df: Callable

    def residual(self, r) -> np.ndarray:
        """-Δu_s - f(u_s) evaluated pointwise in closed form."""
        r = np.asarray(r, dtype=float)
        lap = self.d2u(r) + (self.dim - 1) / r * self.du(r)
        return -lap - self.f(self.u(r))

    def relative_residual(self, r) -> np.ndarray:
        """Residual scaled by |Δu_s| + |f(u_s)|; the terms grow like r^{-2}."""
        r = np.asarray(r, dtype=float)
        lap = self.d2u(r) + (self.dim - 1) / r * self.du(r)
        fu = self.f(self.u(r))
        return (-lap - fu) / (np.abs(lap) + np.abs(fu))

    def potential(self, r):
        """f'(u_s(r)), the potential of the linearized operator."""
        return self.df(self.u(r))


def singular_solution(kind: str, N: int, p: float | None = None) -> SingularSolution:
    """u_s = ln(2(N-2)/r²) for e^u, or c_p r^{-2/(p-1)} for u^p."""
    if N < 3:
        raise ValueError("singular solutions need N >= 3")
    if kind == "exp":
        c = 2.0 * (N - 2)
        return SingularSolution(
            N, kind, None, c,
            u=lambda r: np.log(c / np.asarray(r, dtype=float) ** 2),
            du=lambda r: -2.0 / np.asarray(r, dtype=float),
            d2u=lambda r: 2.0 / np.asarray(r, dtype=float) ** 2,
            f=np.exp, df=np.exp)
    if kind != "power" or p is None:
        raise ValueError("power singular solution needs p")
    _check_power(N, p)
    m = 2.0 / (p - 1.0)
    cp = (m * (N - 2 - m)) ** (1.0 / (p - 1.0))

    def pos(t):
        return np.maximum(np.asarray(t, dtype=float), 0.0)

    return SingularSolution(
        N, kind, float(p), cp,
        u=lambda r: cp * np.asarray(r, dtype=float) ** (-m),
        du=lambda r: -m * cp * np.asarray(r, dtype=float) ** (-m - 1),
        d2u=lambda r: m * (m + 1) * cp * np.asarray(r, dtype=float) ** (-m - 2),
        f=lambda t: pos(t) ** p, df=lambda t: p * pos(t) ** (p - 1))


def emden_trajectory(profile: RadialProfile, kind: str = "exp", p: float | None = None,
                     r_min: float | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Push a radial profile through the Emden change of variables.

    Returns (t, v, v') at the profile mesh points with r > r_min.
    """
    r = np.asarray(profile.mesh)
    keep = r > (r_min if r_min is not None else 0.0)
    r, u, du = r[keep], np.asarray(profile.u)[keep], np.asarray(profile.du)[keep]
    t = np.log(r)
    if kind == "exp":
        return t, u + 2.0 * t, r * du + 2.0
    m = 2.0 / (p - 1.0)
    w = r ** m * u
    return t, w, r ** m * (r * du + m * u)


def write_trajectory_csv(path, t, v, dv) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "v", "dv"])
        for row in zip(t, v, dv):
            wr.writerow([repr(float(x)) for x in row])
