"""Two-dimensional grid solver and a discrete moving-plane sweep.

The Laplacian is the 5-point stencil; on a disk, nodes next to the circle
use Shortley–Weller arms that end exactly on the boundary, which keeps the
scheme second order.  The sweep uses only grid-exact reflections: planes
x·e = λ with e along a grid axis (λ ∈ hZ/2) or a grid diagonal
(λ ∈ hZ/√2), so no interpolation enters w_λ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .model import (BoundaryCondition, Box, Disk, EllipticaError, GridSolution2D,
                    Nonlinearity)
from .radial_solver import ShootingParams, shoot

__all__ = [
    "NonConvergence", "UncenteredInput", "grid_from_function", "laplacian_2d",
    "grid_residual", "radial_initial_guess", "perturbed_radial_guess", "solve_grid_2d", "center_grid",
    "MovingPlaneState", "SweepResult", "moving_plane_sweep", "sweep_axes",
    "RadialDeviation", "radial_deviation",
]


class NonConvergence(EllipticaError):
    def __init__(self, message, best_residual, partial=None):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual
        self.partial = partial


class UncenteredInput(EllipticaError):
    pass


# ---------------------------------------------------------------------------
# grids and operators
# ---------------------------------------------------------------------------

def _axes(geom, h: float) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(geom, Disk):
        a = b = geom.R
    elif isinstance(geom, Box):
        a, b = geom.a, geom.b
    else:
        raise TypeError(f"unknown geometry {geom!r}")
    nx, ny = round(2 * a / h), round(2 * b / h)
    if abs(nx * h - 2 * a) > 1e-9 * a or abs(ny * h - 2 * b) > 1e-9 * b:
        raise ValueError("half-widths must be multiples of h/2")
    if min(nx, ny) < 64:
        raise ValueError(f"h = {h} leaves fewer than 64 cells across the domain")
    return np.linspace(-a, a, nx + 1), np.linspace(-b, b, ny + 1)


def _unknown_mask(geom, bc, X, Y) -> np.ndarray:
    if isinstance(geom, Disk):
        return X ** 2 + Y ** 2 < geom.R ** 2
    if bc is BoundaryCondition.NEUMANN0:
        return np.ones_like(X, dtype=bool)
    m = np.zeros_like(X, dtype=bool)
    m[1:-1, 1:-1] = True
    return m


def grid_from_function(fun, geom, h: float, bc=BoundaryCondition.DIRICHLET0,
                       **meta) -> GridSolution2D:
    """Sample fun(X, Y) on the grid; disk nodes outside the circle are set to 0."""
    x, y = _axes(geom, h)
    X, Y = np.meshgrid(x, y, indexing="ij")
    u = np.asarray(fun(X, Y), dtype=float)
    if isinstance(geom, Disk):
        u = np.where(X ** 2 + Y ** 2 < geom.R ** 2, u, 0.0)
    return GridSolution2D(geom, h, x, y, u, bc, math.nan, (), dict(meta, source="sampled"))


def laplacian_2d(geom, bc, h: float):
    """Sparse matrix of -Δ_h on the unknown nodes, plus the node mask.

    Dirichlet data are homogeneous, so boundary neighbours simply drop out.
    """
    x, y = _axes(geom, h)
    X, Y = np.meshgrid(x, y, indexing="ij")
    mask = _unknown_mask(geom, bc, X, Y)
    n = int(mask.sum())
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(n)
    I, J = np.nonzero(mask)
    P = idx[I, J]
    nx, ny = mask.shape
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for axis in (0, 1):
        arms, nbrs = [], []
        for sgn in (1, -1):
            Ii, Jj = (I + sgn, J) if axis == 0 else (I, J + sgn)
            inb = (Ii >= 0) & (Ii < nx) & (Jj >= 0) & (Jj < ny)
            q = np.full(n, -1, dtype=np.int64)
            q[inb] = idx[Ii[inb], Jj[inb]]
            arm = np.full(n, h)
            if isinstance(geom, Disk):
                out = q < 0
                px, py = X[I, J], Y[I, J]
                along, across = (px, py) if axis == 0 else (py, px)
                reach = np.sqrt(np.maximum(geom.R ** 2 - across ** 2, 0.0))
                arm[out] = (reach - sgn * along)[out]
                arm = np.maximum(arm, 1e-3 * h)
            elif bc is BoundaryCondition.NEUMANN0:
                # mirror ghost: u_{-1} = u_{1}
                miss = q < 0
                Im, Jm = (I - sgn, J) if axis == 0 else (I, J - sgn)
                q[miss] = idx[Im[miss], Jm[miss]]
            arms.append(arm)
            nbrs.append(q)
        hp, hm = arms
        cp = 2.0 / (hp * (hp + hm))
        cm = 2.0 / (hm * (hp + hm))
        diag += cp + cm
        for c, q in ((cp, nbrs[0]), (cm, nbrs[1])):
            ok = q >= 0
            rows.append(P[ok])
            cols.append(q[ok])
            vals.append(-c[ok])
    rows.append(P)
    cols.append(P)
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A, mask, x, y


def grid_residual(g: GridSolution2D, f: Nonlinearity) -> float:
    """Max-norm of -Δ_h u - f(u) over the unknown nodes (recomputed)."""
    A, mask, _, _ = laplacian_2d(g.geometry, g.bc, g.h)
    v = np.asarray(g.u)[mask]
    return float(np.max(np.abs(A @ v - f.eval(v))))


def radial_initial_guess(f: Nonlinearity, R: float, a_bracket=(1e-3, 1e3)):
    """2D radial solution with u(R) = 0 by shooting and bracketing the center value.

    Returns a callable of r, or None when no sign change of u(R; a) is found.
    """
    def end(a):
        try:
            return shoot(f, ShootingParams(2, a, R)).u[-1]
        except EllipticaError:
            return -math.inf

    grid = np.geomspace(*a_bracket, 49)
    vals = [end(a) for a in grid]
    for a0, a1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
        if v0 > 0 > v1 and math.isfinite(v1):
            a = brentq(end, a0, a1, xtol=1e-13, rtol=1e-13)
            prof = shoot(f, ShootingParams(2, a, R))
            return lambda r: prof.u_at(np.minimum(r, R))
    return None


def perturbed_radial_guess(f: Nonlinearity, geom: Disk, amplitude: float = 0.05,
                           a_bracket=(1e-3, 1e3)):
    """Radial guess times (1 + amplitude·x(R² - r²)/R²), a deliberately off-center start.

    The factor vanishes on the boundary, so Dirichlet data are preserved.
    """
    R = geom.R
    g0 = radial_initial_guess(f, R, a_bracket)
    if g0 is None:
        return None

    def guess(X, Y):
        r2 = X ** 2 + Y ** 2
        return g0(np.sqrt(r2)) * (1 + amplitude * X * (R * R - r2) / (R * R))

    return guess


def solve_grid_2d(f: Nonlinearity, geom, bc=BoundaryCondition.DIRICHLET0, h: float = 1 / 64,
                  damping: float = 1.0, initial=None, tol: float = 1e-8,
                  max_iter: int = 30) -> GridSolution2D:
    """Damped Newton iteration for -Δ_h u = f(u).

    ``initial`` is an array on the grid or a callable of (X, Y); the default
    is u = 0.  The Jacobian is factored once per iteration (sparse LU) and
    reused while the residual keeps dropping by at least a factor 4.
    """
    A, mask, x, y = laplacian_2d(geom, bc, h)
    X, Y = np.meshgrid(x, y, indexing="ij")
    if initial is None:
        u0 = np.zeros_like(X)
    elif callable(initial):
        u0 = np.asarray(initial(X, Y), dtype=float)
    else:
        u0 = np.asarray(initial, dtype=float)
    v = u0[mask].copy()

    def F(v):
        return A @ v - f.eval(v)

    res = F(v)
    rn = float(np.max(np.abs(res)))
    history = [rn]
    best = (rn, v.copy())
    lu = None
    for _ in range(max_iter):
        if rn <= tol:
            break
        if lu is None:
            Jm = (A - sp.diags(f.deriv1(v))).tocsc()
            lu = splu(Jm, permc_spec="MMD_AT_PLUS_A")
        step = lu.solve(-res)
        t = damping
        while True:
            vn = v + t * step
            rn_new = float(np.max(np.abs(F(vn))))
            if rn_new < rn or t < 1e-4:
                break
            t *= 0.5
        if rn_new > rn / 4:
            lu = None  # contraction too slow: refresh the Jacobian
        v, rn = vn, rn_new
        res = F(v)
        history.append(rn)
        if rn < best[0]:
            best = (rn, v.copy())
    u = np.zeros_like(X)
    if rn > tol:
        u[mask] = best[1]
        part = GridSolution2D(geom, h, x, y, u, bc, best[0], tuple(history), {"converged": False})
        raise NonConvergence("Newton iteration did not reach the tolerance", best[0], part)
    u[mask] = v
    return GridSolution2D(geom, h, x, y, u, bc, rn, tuple(history),
                          {"source": "solve_grid_2d", "nonlinearity": f.name,
                           "iterations": len(history) - 1, "converged": True})


# ---------------------------------------------------------------------------
# centering
# ---------------------------------------------------------------------------

def _argmax_subcell(g: GridSolution2D) -> tuple[float, float]:
    u = np.where(np.isfinite(g.u), g.u, -np.inf)
    i, j = np.unravel_index(int(np.argmax(u)), u.shape)
    i = min(max(i, 1), u.shape[0] - 2)
    j = min(max(j, 1), u.shape[1] - 2)
    w = np.asarray(g.u)[i - 1:i + 2, j - 1:j + 2]
    # quadratic fit through the 3x3 block (exact for quadratics)
    gx = (w[2, 1] - w[0, 1]) / 2
    gy = (w[1, 2] - w[1, 0]) / 2
    hxx = w[2, 1] - 2 * w[1, 1] + w[0, 1]
    hyy = w[1, 2] - 2 * w[1, 1] + w[1, 0]
    hxy = (w[2, 2] - w[2, 0] - w[0, 2] + w[0, 0]) / 4
    H = np.array([[hxx, hxy], [hxy, hyy]])
    try:
        d = -np.linalg.solve(H, [gx, gy])
    except np.linalg.LinAlgError:
        d = np.zeros(2)
    d = np.clip(d, -1.0, 1.0)
    return g.x[i] + d[0] * g.h, g.y[j] + d[1] * g.h


def center_grid(g: GridSolution2D, tol_cells: float = 1e-3) -> GridSolution2D:
    """Translate the data so that its maximum sits at the grid center.

    The maximum is located by a quadratic fit around the discrete argmax;
    resampling uses a bicubic spline.  Nodes whose preimage leaves the
    domain are marked NaN (they are ignored by the sweep).
    """
    cx, cy = _argmax_subcell(g)
    if math.hypot(cx, cy) <= tol_cells * g.h:
        return g
    spline = RectBivariateSpline(g.x, g.y, np.nan_to_num(g.u), kx=3, ky=3)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    Xs, Ys = X + cx, Y + cy
    u = spline.ev(Xs, Ys)
    if isinstance(g.geometry, Disk):
        ok = Xs ** 2 + Ys ** 2 < g.geometry.R ** 2
    else:
        ok = (np.abs(Xs) <= g.x[-1]) & (np.abs(Ys) <= g.y[-1])
    u = np.where(ok, u, np.nan)
    meta = dict(g.meta, shift=(cx, cy), centered=True)
    return GridSolution2D(g.geometry, g.h, g.x, g.y, u, g.bc, g.residual_norm, g.history, meta)


# ---------------------------------------------------------------------------
# moving planes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MovingPlaneState:
    lam: float
    min_w: float
    a_lambda_norm: float
    n_points: int
    w_lambda: np.ndarray | None = None   # kept only on request
    lambda0: float = math.nan


@dataclass(frozen=True)
class SweepResult:
    axis: tuple[float, float]
    lambda0: float
    tol: float
    states: tuple

    @property
    def symmetric(self) -> bool:
        return abs(self.lambda0) <= self.tol


def _frame(g: GridSolution2D, k: int):
    """Rotate by k quarter turns; return (values, valid mask, old X, old Y)."""
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    u = np.asarray(g.u, dtype=float)
    valid = np.isfinite(u)
    if isinstance(g.geometry, Disk):
        valid &= X ** 2 + Y ** 2 < g.geometry.R ** 2
    return (np.rot90(u, k), np.rot90(valid, k), np.rot90(X, k), np.rot90(Y, k))


def _a_lambda(f, u, ul, w):
    out = np.zeros_like(w)
    neg = w < 0           # u > u_λ
    if np.any(neg):
        du = ul[neg] - u[neg]
        small = np.abs(du) < 1e-12
        q = np.empty_like(du)
        q[~small] = (f.eval(ul[neg][~small]) - f.eval(u[neg][~small])) / du[~small]
        q[small] = f.deriv1(u[neg][small])
        out[neg] = q
    return out


def moving_plane_sweep(g: GridSolution2D, axis, steps: int = 64, f: Nonlinearity | None = None,
                       tol: float | None = None, keep_w: bool = False,
                       require_centered: bool = True) -> tuple[float, list[MovingPlaneState]]:
    """Move the plane x·e = λ from the domain edge to λ = 0.

    ``axis`` is an integer k in 0..7 (direction at angle kπ/4) or a unit
    vector along a grid axis or diagonal.  Returns λ₀, the largest tested
    λ <= 0 such that min w_t >= -tol for every tested t <= λ, and the list
    of states.  With ``f`` given, each state carries the discrete L¹ norm
    (= L^{N/2} in two dimensions) of a_λ.
    """
    if square := (g.u.shape[0] != g.u.shape[1]):
        if not isinstance(g.geometry, Box):
            raise ValueError("non-square grid")
    if require_centered:
        cx, cy = _argmax_subcell(g)
        if math.hypot(cx, cy) > g.h:
            raise UncenteredInput(f"maximum at ({cx:.3g}, {cy:.3g}), more than one cell off center")
    k = _axis_index(axis)
    if square and k % 2 == 1:
        raise ValueError("diagonal sweeps need a square grid")
    tol = g.h ** 2 if tol is None else tol
    u, valid, Xo, Yo = _frame(g, k // 2)
    n = u.shape[0]
    h = g.h
    cell = h * h
    if k % 2 == 0:
        kmax = n - 1                      # λ = -R + kk h/2, center at kk = n-1
        lam_of = lambda kk: (kk - (n - 1)) * h / 2
        I = np.arange(n)[:, None] * np.ones((1, u.shape[1]), dtype=int)
        J = np.ones((n, 1), dtype=int) * np.arange(u.shape[1])[None, :]
        S = 2 * I                          # compare with kk: x < λ  <=>  2i < kk
    else:
        kmax = n - 1                      # λ√2 = -2R + kk h
        lam_of = lambda kk: (kk - (n - 1)) * h / math.sqrt(2)
        I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        S = I + J
    ks = np.unique(np.round(np.linspace(0, kmax, max(2, steps))).astype(int))
    states = []
    lam0 = None
    for kk in ks:
        side = (S < kk) & valid
        if k % 2 == 0:
            Ir, Jr = kk - I, J
        else:
            Ir, Jr = kk - J, kk - I
        inb = (Ir >= 0) & (Ir < n) & (Jr >= 0) & (Jr < u.shape[1])
        sel = side & inb
        sel[sel] = valid[Ir[sel], Jr[sel]]
        uu = u[sel]
        ul = u[Ir[sel], Jr[sel]]
        w = ul - uu
        mw = float(np.min(w)) if w.size else math.inf
        an = float(np.sum(np.abs(_a_lambda(f, uu, ul, w))) * cell) if f is not None else math.nan
        wl = None
        if keep_w:
            wl = np.full(u.shape, np.nan)
            wl[sel] = w
        lam = lam_of(kk)
        if mw < -tol and lam0 is None:
            lam0 = states[-1].lam if states else lam
        states.append(MovingPlaneState(lam, mw, an, int(w.size), wl))
    if lam0 is None:
        lam0 = states[-1].lam
    states = [MovingPlaneState(s.lam, s.min_w, s.a_lambda_norm, s.n_points, s.w_lambda, lam0)
              for s in states]
    return lam0, states


def _axis_index(axis) -> int:
    if isinstance(axis, (int, np.integer)):
        return int(axis) % 8
    e = np.asarray(axis, dtype=float)
    ang = math.atan2(e[1], e[0]) % (2 * math.pi)
    k = ang / (math.pi / 4)
    if abs(k - round(k)) > 1e-9:
        raise ValueError("axis must be a multiple of 45 degrees for grid-exact reflections")
    return int(round(k)) % 8


def _axis_vector(g: GridSolution2D, k: int) -> tuple[float, float]:
    # recover the sweep direction in original coordinates from the rotation
    _, _, Xo, Yo = _frame(g, k // 2)
    n = Xo.shape[0]
    p0 = np.array([Xo[0, 0], Yo[0, 0]])
    if k % 2 == 0:
        p1 = np.array([Xo[n - 1, 0], Yo[n - 1, 0]])
    else:
        p1 = np.array([Xo[n - 1, n - 1], Yo[n - 1, n - 1]])
    d = p1 - p0
    d /= np.linalg.norm(d)
    return float(d[0]), float(d[1])


def sweep_axes(g: GridSolution2D, f: Nonlinearity | None = None, steps: int = 64,
               tol: float | None = None) -> list[SweepResult]:
    """Moving-plane sweeps along the 8 grid-exact directions kπ/4."""
    out = []
    t = g.h ** 2 if tol is None else tol
    for k in range(8):
        lam0, states = moving_plane_sweep(g, k, steps, f, t)
        out.append(SweepResult(_axis_vector(g, k), lam0, t, tuple(states)))
    return out


# ---------------------------------------------------------------------------
# radial deviation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialDeviation:
    deviation: float
    radii: tuple
    spread: tuple              # max - min on each circle
    averages: tuple            # circle means
    decreasing: bool           # circle means strictly decreasing in r


def radial_deviation(g: GridSolution2D, n_radii: int = 64, margin_cells: int = 8) -> RadialDeviation:
    """Largest oscillation of u over circles about the grid center.

    Circles are sampled with a bicubic spline at spacing about h and kept
    at least ``margin_cells`` cells inside the domain.
    """
    if isinstance(g.geometry, Disk):
        rmax = g.geometry.R - margin_cells * g.h
    else:
        rmax = min(g.geometry.a, g.geometry.b) - margin_cells * g.h
    u = np.asarray(g.u, dtype=float)
    spline = RectBivariateSpline(g.x, g.y, np.nan_to_num(u), kx=3, ky=3)
    radii = np.linspace(rmax / n_radii, rmax, n_radii)
    spread, avg = [], []
    for rho in radii:
        m = max(16, int(math.ceil(2 * math.pi * rho / g.h)))
        th = 2 * math.pi * np.arange(m) / m
        vals = spline.ev(rho * np.cos(th), rho * np.sin(th))
        spread.append(float(np.max(vals) - np.min(vals)))
        avg.append(float(np.mean(vals)))
    dec = all(b < a for a, b in zip(avg, avg[1:]))
    return RadialDeviation(float(np.max(spread)), tuple(radii), tuple(spread), tuple(avg), dec)
