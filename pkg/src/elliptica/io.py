"""JSON and CSV serialization of profiles, grids, spectra, ledgers and decay fits.

JSON is written with sorted keys and ``repr`` floats so identical inputs give
byte-identical files.  Non-finite floats are stored as the strings
"inf", "-inf", "nan" to keep the documents strict JSON.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import math
import os
from pathlib import Path

import numpy as np

from .model import (BoundaryCondition, Box, DecayFit, Disk, GridSolution2D, ProfileError,
                    RadialProfile, SpectralReport)

__all__ = [
    "PROFILE_SCHEMA", "SPECTRAL_SCHEMA", "LEDGER_SCHEMA",
    "to_jsonable", "dump_json", "load_json",
    "profile_to_dict", "profile_from_dict", "write_profile_json", "read_profile_json",
    "write_profile_csv", "read_profile_csv",
    "grid_to_dict", "grid_from_dict", "write_grid_csv",
    "spectral_to_dict", "spectral_from_dict", "write_spectral_csv",
    "write_ledger_json", "append_decay_csv", "DECAY_COLUMNS",
]

PROFILE_SCHEMA = "elliptica-profile-v1"
SPECTRAL_SCHEMA = "elliptica-spectral-v1"
LEDGER_SCHEMA = "elliptica-ledger-v1"
DECAY_COLUMNS = ("profile", "quantity", "exponent", "bound", "verdict",
                 "r_lo", "r_hi", "residual", "constant")

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _float(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _unfloat(x):
    if isinstance(x, str):
        return _NONFINITE[x]
    return float(x)


def to_jsonable(obj):
    """Recursively convert numpy / enum / dataclass values into plain JSON types."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, complex):
        return {"re": _float(obj.real), "im": _float(obj.imag)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        d = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        d["type"] = type(obj).__name__
        return to_jsonable(d)
    return repr(obj)


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=1, allow_nan=False)
    path.write_text(text + "\n")
    return path


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def profile_to_dict(p: RadialProfile) -> dict:
    d = {
        "schema": PROFILE_SCHEMA,
        "kind": "radial",
        "dim": p.dim,
        "center_value": _float(p.center_value),
        "inf_estimate": _float(p.inf_estimate),
        "r": [float(v) for v in p.mesh],
        "u": [float(v) for v in p.u],
        "du": [float(v) for v in p.du],
        "meta": to_jsonable(p.meta),
    }
    if p.d2u is not None:
        d["d2u"] = [float(v) for v in p.d2u]
    return d


def profile_from_dict(d: dict) -> RadialProfile:
    if d.get("schema") != PROFILE_SCHEMA or d.get("kind", "radial") != "radial":
        raise ProfileError(f"not a radial {PROFILE_SCHEMA} document")
    d2u = d.get("d2u")
    return RadialProfile(int(d["dim"]), np.array(d["r"], dtype=float),
                         np.array(d["u"], dtype=float), np.array(d["du"], dtype=float),
                         _unfloat(d["center_value"]), _unfloat(d["inf_estimate"]),
                         dict(d.get("meta", {})),
                         None if d2u is None else np.array(d2u, dtype=float))


def write_profile_json(p: RadialProfile, path) -> Path:
    return dump_json(profile_to_dict(p), path)


def read_profile_json(path) -> RadialProfile:
    return profile_from_dict(load_json(path))


def write_profile_csv(p: RadialProfile, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["r", "u", "du"])
        for row in zip(p.mesh, p.u, p.du):
            wr.writerow([repr(float(x)) for x in row])
    return path


def read_profile_csv(path, dim: int, **meta) -> RadialProfile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    r, u, du = data.T
    return RadialProfile(dim, r, u, du, float(u[0]), float(np.min(u)), meta)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def _geometry_to_dict(g) -> dict:
    if isinstance(g, Disk):
        return {"type": "disk", "R": g.R}
    if isinstance(g, Box):
        return {"type": "box", "a": g.a, "b": g.b}
    raise TypeError(f"unknown geometry {g!r}")


def _geometry_from_dict(d):
    if d["type"] == "disk":
        return Disk(float(d["R"]))
    return Box(float(d["a"]), float(d["b"]))


def grid_to_dict(g: GridSolution2D) -> dict:
    return {
        "schema": PROFILE_SCHEMA,
        "kind": "grid2d",
        "geometry": _geometry_to_dict(g.geometry),
        "h": g.h,
        "bc": g.bc.value,
        "x": [float(v) for v in g.x],
        "y": [float(v) for v in g.y],
        "u": [[float(v) for v in row] for row in g.u],
        "residual_norm": _float(g.residual_norm),
        "history": [_float(v) for v in g.history],
        "meta": to_jsonable(g.meta),
    }


def grid_from_dict(d: dict) -> GridSolution2D:
    if d.get("schema") != PROFILE_SCHEMA or d.get("kind") != "grid2d":
        raise ProfileError(f"not a grid {PROFILE_SCHEMA} document")
    return GridSolution2D(_geometry_from_dict(d["geometry"]), float(d["h"]),
                          np.array(d["x"], dtype=float), np.array(d["y"], dtype=float),
                          np.array(d["u"], dtype=float), BoundaryCondition(d["bc"]),
                          _unfloat(d["residual_norm"]),
                          tuple(_unfloat(v) for v in d.get("history", ())),
                          dict(d.get("meta", {})))


def write_grid_csv(g: GridSolution2D, path, inside_only: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    keep = g.inside() if inside_only else np.ones_like(X, dtype=bool)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "u"])
        for x, y, u in zip(X[keep], Y[keep], g.u[keep]):
            wr.writerow([repr(float(x)), repr(float(y)), repr(float(u))])
    return path


# ---------------------------------------------------------------------------
# spectra, ledgers, decay fits
# ---------------------------------------------------------------------------

def spectral_to_dict(s: SpectralReport, **extra) -> dict:
    d = {
        "schema": SPECTRAL_SCHEMA,
        "dim": s.dim,
        "radii": [_float(r) for r in s.radii],
        "lambda1": [_float(v) for v in s.lambda1],
        "neg_count": [int(n) for n in s.neg_count],
        "grid_resolution": s.grid_resolution,
        "r0_outside": _float(s.r0_outside),
        "tol_spec": s.tol_spec,
    }
    d.update(to_jsonable(extra))
    return d


def spectral_from_dict(d: dict) -> SpectralReport:
    if d.get("schema") != SPECTRAL_SCHEMA:
        raise ValueError(f"not a {SPECTRAL_SCHEMA} document")
    return SpectralReport(int(d["dim"]), tuple(_unfloat(r) for r in d["radii"]),
                          tuple(_unfloat(v) for v in d["lambda1"]),
                          tuple(int(n) for n in d["neg_count"]), int(d["grid_resolution"]),
                          _unfloat(d["r0_outside"]), float(d["tol_spec"]))


def write_spectral_csv(s: SpectralReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "lambda1", "neg_count"])
        for R, lam, n in zip(s.radii, s.lambda1, s.neg_count):
            wr.writerow([repr(float(R)), repr(float(lam)), int(n)])
    return path


def write_ledger_json(ledger, path) -> Path:
    d = ledger.to_dict()
    if d.get("schema") != LEDGER_SCHEMA:
        raise ValueError("ledger does not carry the expected schema tag")
    return dump_json(d, path)


def append_decay_csv(path, profile_id: str, fit: DecayFit) -> Path:
    """Append one row per fit; the header is written when the file is new."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        wr = csv.writer(fh)
        if fresh:
            wr.writerow(DECAY_COLUMNS)
        wr.writerow([profile_id, fit.quantity.value, repr(float(fit.exponent)),
                     repr(float(fit.bound)), fit.verdict, repr(float(fit.fit_range[0])),
                     repr(float(fit.fit_range[1])), repr(float(fit.residual)),
                     repr(float(fit.constant))])
    return path
