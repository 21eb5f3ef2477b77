"""Command-line front end: ``elliptica <command> [options]``.

Settings are merged in three layers: built-in defaults, the TOML file given
by ``--config`` (tables ``[common]``, ``[nonlinearity]`` and one table per
command) and explicit command-line flags.  Every output JSON is a pure
function of the merged settings; wall-clock data goes to ``metadata_*.json``.

Exit status: 0 on success (verdicts such as "indeterminate" live in the
reports), 2 for configuration errors, 3 for numerical failures, in which
case ``error.json`` holds the diagnostics.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import io as eio
from .model import EllipticaError, ProfileError, make_builtin_nonlinearity

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


# (type, default); a default of None means "optional"
COMMON = {"out": (str, "elliptica-out"), "jobs": (int, 1), "seed": (int, 0)}
NONLINEARITY = {"name": (str, "exp"), "p": (float, None), "beta": (float, None), "c": (float, None)}

_SOURCE = {
    "profile": (str, None),        # path to an elliptica-profile-v1 JSON file
    "closed_form": (str, None),    # bubble | liouville
    "scale": (float, 1.0),         # bubble dilation
    "center": (float, None),       # shoot from u(0) = center
    "r_max": (float, 1e4),
    "mesh_ratio": (float, 1.01),
    "rel_tol": (float, 1e-10),
    "abs_tol": (float, 1e-13),
}

SECTIONS = {
    "solve": {
        "dim": (int, 3), "center": (float, 0.0), "r_max": (float, 1e4),
        "rel_tol": (float, 1e-10), "abs_tol": (float, 1e-13), "mesh_ratio": (float, 1.05),
        "blowup_guard": (float, 1e8), "residual_tol": (float, 1e-6), "trajectory": (bool, False),
    },
    "branch": {
        "dim": (int, 10), "a_min": (float, 0.5), "a_max": (float, 50.0), "samples": (int, 64),
        "r_max": (float, 1e6), "refine": (int, 0), "check_radius": (float, 1e3),
        "resolution": (int, 2048), "tol_spec": (float, 1e-6), "mesh_ratio": (float, 1.05),
    },
    "spectrum": dict(_SOURCE, **{
        "dim": (int, 3), "singular": (bool, False),
        "radii": (list, [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]),
        "annuli": (list, [[0.1, 10.0], [0.01, 1.0], [1.0, 100.0]]),
        "resolution": (int, None), "tol_spec": (float, 1e-6), "lambda_tol": (float, 1e-10),
        "outside": (bool, True), "property_checks": (int, 16),
    }),
    "inequality": dict(_SOURCE, **{
        "dim": (int, 10), "zeta": (str, "thm1"), "form": (str, "auto"),
        "R1": (float, 4.0), "R": (float, 32.0), "alpha": (float, None), "R2": (float, 64.0),
        "eps": (float, 0.0), "resolutions": (list, [1, 2]), "require_stable": (bool, True),
    }),
    "decay": dict(_SOURCE, **{
        "dim": (int, 3), "r_max": (float, 1e5), "quantities": (list, ["sup", "gradient", "l2star"]),
        "r_min": (float, None), "r_fit_max": (float, None), "exponent_slack": (float, 0.05),
        "tv_gate": (float, 1e-4), "profile_id": (str, None),
    }),
    "symmetry": {
        "radius": (float, 4.0), "h": (str, "1/64"), "steps": (int, 64), "tol": (float, None),
        "newton_tol": (float, 1e-8), "max_iter": (int, 30), "amplitude": (float, 0.05),
        "n_radii": (int, 64), "grid_csv": (bool, True),
    },
    "gallery": {"action": (str, "verify"), "id": (str, "all"), "dim": (int, None)},
    "report": {"input": (str, None), "plots": (bool, True)},
}

_SYMMETRY_NONLINEARITY = {"name": "truncated", "p": 2.0, "beta": 1.0, "c": None}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _coerce(section, key, value, typ):
    if value is None:
        return None
    if typ is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("1", "true", "yes", "0", "false", "no"):
            return value.lower() in ("1", "true", "yes")
    elif typ is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if isinstance(value, str):
            try:
                return float(Fraction(value))
            except ValueError:
                pass
    elif typ is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lstrip("-").isdigit():
            return int(value)
    elif typ is str:
        if isinstance(value, (str, int, float)) and not isinstance(value, bool):
            return str(value)
    elif typ is list:
        if isinstance(value, (list, tuple)):
            return list(value)
        if isinstance(value, str):
            try:
                return json.loads(value if value.startswith("[") else f"[{value}]")
            except json.JSONDecodeError:
                pass
    raise ConfigError(f"[{section}] {key}: cannot read {value!r} as {typ.__name__}")


def _apply(target, schema, section, values):
    for key, value in values.items():
        if key not in schema:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        target[key] = _coerce(section, key, value, schema[key][0])


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    known = {"common", "nonlinearity", *SECTIONS}
    for name, table in data.items():
        if name not in known:
            raise ConfigError(f"unknown config table [{name}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
    return data


def merge_settings(command: str, file_cfg: dict, cli: dict) -> dict:
    """Defaults, then the config file, then explicit flags."""
    common = {k: d for k, (_, d) in COMMON.items()}
    nl = {k: d for k, (_, d) in NONLINEARITY.items()}
    if command == "symmetry":
        nl.update(_SYMMETRY_NONLINEARITY)
    sec = {k: d for k, (_, d) in SECTIONS[command].items()}
    _apply(common, COMMON, "common", file_cfg.get("common", {}))
    _apply(nl, NONLINEARITY, "nonlinearity", file_cfg.get("nonlinearity", {}))
    _apply(sec, SECTIONS[command], command, file_cfg.get(command, {}))
    _apply(common, COMMON, "common", cli.get("common", {}))
    _apply(nl, NONLINEARITY, "nonlinearity", cli.get("nonlinearity", {}))
    _apply(sec, SECTIONS[command], command, cli.get(command, {}))
    if os.environ.get("ELLIPTICA_OUT"):
        common["out"] = os.environ["ELLIPTICA_OUT"]
    if common["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    if not 0 <= common["seed"] < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return {"command": command, "common": common, "nonlinearity": nl, command: sec}


def settings_hash(settings: dict) -> str:
    s = dict(settings)
    s["common"] = {k: v for k, v in s["common"].items() if k not in ("out", "jobs")}
    blob = json.dumps(eio.to_jsonable(s), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _nonlinearity(nl: dict):
    try:
        return make_builtin_nonlinearity(nl["name"], p=nl["p"], beta=nl["beta"], c=nl["c"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# run context
# ---------------------------------------------------------------------------

class Run:
    def __init__(self, settings: dict):
        self.settings = settings
        self.command = settings["command"]
        self.cfg = settings[self.command]
        self.common = settings["common"]
        self.out = Path(self.common["out"])
        self.hash = settings_hash(settings)
        self.lines: list[str] = []
        self.files: list[str] = []

    def say(self, line: str = ""):
        self.lines.append(line)
        print(line)

    def json(self, name, doc):
        doc = dict(doc, provenance={"config_hash": self.hash, "version": __version__,
                                    "command": self.command})
        self.files.append(str(eio.dump_json(doc, self.out / name)))

    def file(self, path):
        self.files.append(str(path))

    def finish(self):
        self.out.mkdir(parents=True, exist_ok=True)
        summary = self.out / f"summary_{self.command}.txt"
        summary.write_text("\n".join(self.lines) + "\n")


def _load_profile(run: Run, f):
    from .gallery import bubble, liouville_2d
    from .radial_solver import ShootingParams, shoot
    c = run.cfg
    N = c["dim"]
    chosen = [k for k in ("profile", "closed_form", "center") if c.get(k) is not None]
    if len(chosen) > 1:
        raise ConfigError(f"give only one profile source, got {chosen}")
    if c.get("profile"):
        try:
            prof = eio.read_profile_json(c["profile"])
        except (OSError, KeyError, json.JSONDecodeError, ProfileError) as exc:
            raise ConfigError(f"cannot read profile {c['profile']}: {exc}") from exc
        if prof.dim != N:
            raise ConfigError(f"profile has dim {prof.dim}, settings ask for {N}")
        return prof
    if c.get("closed_form") == "bubble":
        return bubble(N, r_max=c["r_max"], scale=c["scale"], ratio=c["mesh_ratio"])
    if c.get("closed_form") == "liouville":
        if N != 2:
            raise ConfigError("the Liouville profile is two-dimensional")
        return liouville_2d(r_max=c["r_max"], ratio=c["mesh_ratio"])
    if c.get("closed_form") is not None:
        raise ConfigError(f"unknown closed form {c['closed_form']!r}")
    a = c["center"] if c.get("center") is not None else 0.0
    return shoot(f, ShootingParams(N, a, c["r_max"], rel_tol=c["rel_tol"], abs_tol=c["abs_tol"],
                                   mesh_ratio=c["mesh_ratio"]))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(run: Run):
    from .emden import emden_trajectory, write_trajectory_csv
    from .model import validate_profile
    from .radial_solver import ShootingParams, classify_tail, shoot
    c = run.cfg
    f = _nonlinearity(run.settings["nonlinearity"])
    sp = ShootingParams(c["dim"], c["center"], c["r_max"], rel_tol=c["rel_tol"],
                        abs_tol=c["abs_tol"], mesh_ratio=c["mesh_ratio"],
                        blowup_guard=c["blowup_guard"])
    prof = shoot(f, sp)
    rep = validate_profile(prof, f, c["residual_tol"])
    status, limit, crossed = classify_tail(prof, f)
    run.json("profile.json", eio.profile_to_dict(prof))
    run.file(eio.write_profile_csv(prof, run.out / "profile.csv"))
    if c["trajectory"] and f.name.startswith(("exp", "power")):
        kind = "exp" if f.name == "exp" else "power"
        t, v, dv = emden_trajectory(prof, kind, f.params.get("p"))
        write_trajectory_csv(run.out / "trajectory.csv", t, v, dv)
        run.file(run.out / "trajectory.csv")
    run.json("solve.json", {"dim": prof.dim, "nonlinearity": f.name, "center_value": c["center"],
                            "r_max": prof.r_max, "points": len(prof.mesh),
                            "residual_max": rep.max_residual, "residual_pass": rep.passed,
                            "tail": status, "limit": limit, "crossed_zero": crossed})
    run.say(f"solve  N={prof.dim}  f={f.name}  u(0)={c['center']:g}  r_max={prof.r_max:g}")
    run.say(f"  mesh points      {len(prof.mesh)}")
    run.say(f"  residual max     {rep.max_residual:.3e}  ({'pass' if rep.passed else 'fail'})")
    run.say(f"  tail             {status}  limit={limit:.6g}")


def cmd_branch(run: Run):
    from .radial_solver import find_bounded_stable_branch
    from .stability import Ball, LinearizedOperator, neg_count
    c = run.cfg
    f = _nonlinearity(run.settings["nonlinearity"])
    samples = find_bounded_stable_branch(f, c["dim"], (c["a_min"], c["a_max"]), c["samples"],
                                         c["r_max"], c["refine"], run.common["jobs"],
                                         mesh_ratio=c["mesh_ratio"])
    rows, witnesses = [], []
    for s in samples:
        row = {"a": s.a, "status": s.status, "limit": s.limit, "crossed_zero": s.crossed_zero,
               "blowup_radius": s.blowup_radius, "neg_count": None}
        if s.bounded and s.profile is not None:
            R = min(c["check_radius"], s.profile.r_max)
            op = LinearizedOperator.from_profile(s.profile, f, Ball(R), c["resolution"])
            row["neg_count"] = neg_count(op, c["tol_spec"])
            if row["neg_count"] == 0:
                witnesses.append(s.a)
        rows.append(row)
    run.json("branch.json", {"dim": c["dim"], "nonlinearity": f.name, "check_radius": c["check_radius"],
                             "samples": rows, "bounded_and_stable": witnesses})
    counts = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    run.say(f"branch  N={c['dim']}  f={f.name}  a in [{c['a_min']:g}, {c['a_max']:g}]  "
            f"{len(rows)} shots")
    run.say("  " + "  ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    run.say(f"  bounded with neg_count = 0 on B_{c['check_radius']:g}: {len(witnesses)}")


def _property_checks(op, lam, n, rng):
    """Rayleigh quotients of random vectors never drop below λ1."""
    worst = math.inf
    for _ in range(n):
        phi = rng.standard_normal(len(op.diag))
        q = op.quadratic_form(phi) / float(np.dot(op.mass, phi ** 2))
        worst = min(worst, q - lam)
    return worst


def cmd_spectrum(run: Run):
    from .model import SpectralReport
    from .stability import (Annulus, hardy_power_threshold, lambda1, morse_index_radial,
                            neg_count, singular_is_stable, singular_operator, NoThreshold)
    c = run.cfg
    nl = run.settings["nonlinearity"]
    N = c["dim"]
    rng = np.random.default_rng(run.common["seed"])
    if c["singular"]:
        kind = "exp" if nl["name"] == "exp" else "power"
        if kind == "power" and nl["p"] is None:
            raise ConfigError("singular power spectrum needs nonlinearity.p")
        res = c["resolution"] or 4096
        R1s, R2s, lams, negs, worst = [], [], [], [], math.inf
        for R1, R2 in c["annuli"]:
            op = singular_operator(kind, N, Annulus(float(R1), float(R2)), res, nl["p"])
            lam = lambda1(op, c["lambda_tol"])
            R1s.append(float(R1))
            R2s.append(float(R2))
            lams.append(lam)
            negs.append(neg_count(op, c["tol_spec"]))
            if c["property_checks"]:
                worst = min(worst, _property_checks(op, lam, c["property_checks"], rng))
        report = SpectralReport(N, tuple(R2s), tuple(lams), tuple(negs), res, math.inf, c["tol_spec"])
        try:
            pstar = hardy_power_threshold(N) if kind == "power" else None
        except NoThreshold:
            pstar = math.inf
        exact = singular_is_stable(kind, N, nl["p"])
        run.json("spectrum.json", eio.spectral_to_dict(
            report, mode="singular", kind=kind, p=nl["p"], inner_radii=R1s,
            hardy_stable=exact, power_threshold=pstar, rayleigh_margin=worst))
        run.file(eio.write_spectral_csv(report, run.out / "spectrum.csv"))
        run.say(f"spectrum  singular {kind}  N={N}  resolution={res}")
        for R1, R2, lam, n in zip(R1s, R2s, lams, negs):
            run.say(f"  annulus ({R1:g}, {R2:g})   lambda1={lam:+.6e}  neg_count={n}")
        run.say(f"  Hardy criterion (exact arithmetic): {'stable' if exact else 'unstable'}")
        return
    f = _nonlinearity(nl)
    prof = _load_profile(run, f)
    res = c["resolution"] or 2048
    radii = [float(R) for R in c["radii"] if R <= prof.r_max]
    if not radii:
        raise ConfigError("no radius inside the profile range")
    report = morse_index_radial(prof, f, radii, res, c["tol_spec"], c["outside"])
    run.json("spectrum.json", eio.spectral_to_dict(report, mode="balls", nonlinearity=f.name))
    run.file(eio.write_spectral_csv(report, run.out / "spectrum.csv"))
    run.say(f"spectrum  N={N}  f={f.name}  resolution={res}")
    for R, lam, n in zip(report.radii, report.lambda1, report.neg_count):
        run.say(f"  B_{R:<8g} lambda1={lam:+.6e}  neg_count={n}")
    run.say(f"  stable outside B_R0 with R0 = {report.r0_outside:.4g}")


def cmd_inequality(run: Run):
    from .inequality_lab import (evaluate_pohozaev, evaluate_radial_22, zeta_theorem1,
                                 zeta_theorem8)
    from .model import alpha_exponent
    c = run.cfg
    f = _nonlinearity(run.settings["nonlinearity"])
    prof = _load_profile(run, f)
    N = c["dim"]
    if c["zeta"] == "thm1":
        zeta = zeta_theorem1(c["R1"], c["R"])
    elif c["zeta"] == "thm8":
        alpha = c["alpha"] if c["alpha"] is not None else alpha_exponent(N)
        zeta = zeta_theorem8(alpha, c["R"], c["R2"], c["eps"])
    else:
        raise ConfigError(f"zeta must be thm1 or thm8, got {c['zeta']!r}")
    forms = {"radial_22": evaluate_radial_22, "pohozaev": evaluate_pohozaev}
    form = c["form"]
    if form == "auto":
        # the Pohozaev-type form needs ζ = 0 on B_1, which only the thm8 family satisfies
        form = "both" if c["zeta"] == "thm8" else "radial_22"
    chosen = list(forms) if form == "both" else [form]
    if any(k not in forms for k in chosen):
        raise ConfigError(f"form must be auto, radial_22, pohozaev or both, got {c['form']!r}")
    run.say(f"inequality  N={N}  zeta={c['zeta']}  profile={prof.meta.get('source', '?')}")
    for name in chosen:
        for res in c["resolutions"]:
            led = forms[name](prof, zeta, f, int(res), c["require_stable"])
            run.json(f"ledger_{name}_r{int(res)}.json", led.to_dict())
            run.say(f"  {name:<10} res={int(res)}  lhs={led.lhs:.6e}  rhs={led.rhs:.6e}  "
                    f"slack={led.slack:+.3e}  err={led.quadrature_error:.1e}  {led.verdict}")


def cmd_decay(run: Run):
    from .asymptotics import (fit_gradient_tail, fit_sup_decay, l2star_norm,
                              normalize_to_zero_limit)
    c = run.cfg
    f = _nonlinearity(run.settings["nonlinearity"])
    prof = normalize_to_zero_limit(_load_profile(run, f), c["tv_gate"])
    pid = c["profile_id"] or f"{prof.meta.get('closed_form', prof.meta.get('source', 'profile'))}" \
                             f"_N{prof.dim}"
    fits, doc = [], {"profile": pid, "dim": prof.dim, "limit": prof.meta.get("limit"), "fits": []}
    for q in c["quantities"]:
        if q == "sup":
            fits.append(fit_sup_decay(prof, c["r_min"], c["r_fit_max"]))
        elif q == "gradient":
            fits.append(fit_gradient_tail(prof, c["r_min"], c["r_fit_max"]))
        elif q == "l2star":
            l2 = l2star_norm(prof)
            doc["l2star"] = {"value": l2.value, "verdict": l2.verdict, "tail_ratio": l2.tail_ratio}
        else:
            raise ConfigError(f"unknown decay quantity {q!r}")
    run.say(f"decay  {pid}  limit={doc['limit']:.6g}")
    csv_path = run.out / "decay.csv"
    if csv_path.exists():
        csv_path.unlink()
    for fit in fits:
        if math.isfinite(fit.exponent) and fit.verdict != "indeterminate":
            verdict = "pass" if fit.exponent <= fit.bound + c["exponent_slack"] else "fail"
            fit = replace(fit, verdict=verdict)
        doc["fits"].append(fit)
        eio.append_decay_csv(csv_path, pid, fit)
        run.say(f"  {fit.quantity.value:<14} exponent={fit.exponent:+.4f}  bound={fit.bound:+.4f}"
                f"  {fit.verdict}")
    if "l2star" in doc:
        run.say(f"  L^2* norm      {doc['l2star']['value']:.6g}  {doc['l2star']['verdict']}")
    run.json("decay.json", doc)
    run.file(csv_path)


def cmd_symmetry(run: Run):
    from .model import Disk
    from .symmetry import (center_grid, grid_residual, perturbed_radial_guess, radial_deviation,
                           solve_grid_2d, sweep_axes)
    c = run.cfg
    f = _nonlinearity(run.settings["nonlinearity"])
    h = float(Fraction(c["h"]))
    geom = Disk(c["radius"])
    guess = perturbed_radial_guess(f, geom, c["amplitude"])
    if guess is None:
        raise EllipticaError("no positive radial solution with zero boundary data was bracketed")
    g = solve_grid_2d(f, geom, h=h, initial=guess, tol=c["newton_tol"], max_iter=c["max_iter"])
    gc = center_grid(g)
    sweeps = sweep_axes(gc, f, c["steps"], c["tol"])
    dev = radial_deviation(gc, c["n_radii"])
    doc = {
        "h": h, "radius": c["radius"], "nonlinearity": f.name,
        "newton_history": g.history, "residual": grid_residual(g, f),
        "axes": [{"axis": s.axis, "lambda0": s.lambda0, "tol": s.tol, "symmetric": s.symmetric,
                  "min_w": min(st.min_w for st in s.states),
                  "max_a_lambda_norm": max(st.a_lambda_norm for st in s.states)}
                 for s in sweeps],
        "radial_deviation": dev.deviation, "deviation_over_h2": dev.deviation / h ** 2,
        "circle_means_decreasing": dev.decreasing,
    }
    run.json("symmetry.json", doc)
    if c["grid_csv"]:
        run.file(eio.write_grid_csv(g, run.out / "grid.csv"))
    nsym = sum(s.symmetric for s in sweeps)
    run.say(f"symmetry  Disk({c['radius']:g})  h={c['h']}  f={f.name}")
    run.say(f"  Newton residual   {g.residual_norm:.2e} after {len(g.history) - 1} steps")
    run.say(f"  axes with lambda0 = 0 within tol: {nsym}/{len(sweeps)}")
    run.say(f"  radial deviation  {dev.deviation:.3e}  ({dev.deviation / h ** 2:.4f} h^2)")


def _verify_one(args):
    from .gallery import verify_entry
    entry_id, dim = args
    return verify_entry(entry_id, dim).to_dict()


def cmd_gallery(run: Run):
    from .gallery import list_entries
    c = run.cfg
    entries = list_entries()
    if c["action"] == "list":
        run.json("gallery_catalog.json", {"entries": [
            {"id": e.id, "title": e.title, "nonlinearity": e.nonlinearity,
             "default_dim": e.default_dim, "claims": list(e.claims), "tag": e.tag}
            for e in entries]})
        for e in entries:
            run.say(f"  {e.id:<14} N={e.default_dim:<3} {e.title}")
        return
    if c["action"] != "verify":
        raise ConfigError(f"gallery action must be list or verify, got {c['action']!r}")
    ids = [e.id for e in entries] if c["id"] == "all" else [c["id"]]
    known = {e.id for e in entries}
    if any(i not in known for i in ids):
        raise ConfigError(f"unknown gallery entry {c['id']!r}")
    tasks = [(i, c["dim"]) for i in ids]
    if run.common["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=run.common["jobs"]) as pool:
            reports = list(pool.map(_verify_one, tasks))
    else:
        reports = [_verify_one(t) for t in tasks]
    for rep in reports:
        run.json(f"gallery_{rep['entry']}.json", rep)
        run.say(f"{rep['entry']}  N={rep['dim']}  {'PASS' if rep['passed'] else 'FAIL'}")
        for cl in rep["claims"]:
            run.say(f"    {cl['name']:<26} {cl['status']}")


def cmd_report(run: Run):
    from .report import build_report
    src = Path(run.cfg["input"] or run.common["out"])
    if not src.is_dir():
        raise ConfigError(f"report input {src} is not a directory")
    rows, files = build_report(src, run.out, run.hash, run.cfg["plots"])
    for f in files:
        run.file(f)
    for line in rows:
        run.say(line)


COMMANDS = {
    "solve": cmd_solve, "branch": cmd_branch, "spectrum": cmd_spectrum,
    "inequality": cmd_inequality, "decay": cmd_decay, "symmetry": cmd_symmetry,
    "gallery": cmd_gallery, "report": cmd_report,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

_FLAG_TYPES = {int: int, float: str, str: str, list: str}


COMMAND_HELP = {
    "solve": "shoot one radial solution",
    "branch": "sweep center values for bounded stable profiles",
    "spectrum": "radial eigenvalues of the linearized operator",
    "inequality": "term-by-term weighted inequality ledgers",
    "decay": "decay exponent fits and L^{2*} norm",
    "symmetry": "2D grid solve with moving-plane sweeps",
    "gallery": "verify the catalog of closed-form examples",
    "report": "summary table and SVG plots from earlier outputs",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elliptica",
                                 description="Numerical laboratory for stable solutions of -Δu = f(u).")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="TOML settings file")
    common.add_argument("--out", dest="common.out", metavar="OUT", default=argparse.SUPPRESS)
    common.add_argument("--jobs", dest="common.jobs", metavar="JOBS", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", dest="common.seed", metavar="SEED", type=int, default=argparse.SUPPRESS)
    common.add_argument("--nonlinearity", dest="nonlinearity.name", metavar="NAME", default=argparse.SUPPRESS,
                        help="exp, power, truncated, allen_cahn or constant")
    common.add_argument("--p", dest="nonlinearity.p", metavar="P", default=argparse.SUPPRESS)
    common.add_argument("--beta", dest="nonlinearity.beta", metavar="BETA", default=argparse.SUPPRESS)
    common.add_argument("--c", dest="nonlinearity.c", metavar="C", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, schema in SECTIONS.items():
        sp = sub.add_parser(name, parents=[common], help=COMMAND_HELP[name])
        for key, (typ, default) in schema.items():
            if name == "gallery" and key == "action":
                sp.add_argument("action", nargs="?", choices=["verify", "list"],
                                default=argparse.SUPPRESS)
                continue
            flag = "--" + key.replace("_", "-")
            dest = f"{name}.{key}"
            if typ is bool:
                sp.add_argument(flag, dest=dest, action="store_const", const=True,
                                default=argparse.SUPPRESS)
                sp.add_argument("--no-" + key.replace("_", "-"), dest=dest, action="store_const",
                                const=False, default=argparse.SUPPRESS)
            else:
                sp.add_argument(flag, dest=dest, type=_FLAG_TYPES[typ], default=argparse.SUPPRESS,
                                metavar=key.upper(), help=f"default {default!r}")
    return ap


def _cli_overrides(ns: argparse.Namespace) -> dict:
    out: dict = {}
    for key, value in vars(ns).items():
        if key in ("command", "config"):
            continue
        if key == "action":
            out.setdefault(ns.command, {})["action"] = value
            continue
        table, _, name = key.partition(".")
        out.setdefault(table, {})[name] = value
    return out


def _write_metadata(out: Path, command: str, settings, started, elapsed, status, files):
    meta = {
        "command": command, "argv": sys.argv[1:], "status": status,
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "elapsed_s": round(elapsed, 3), "version": __version__,
        "python": platform.python_version(), "numpy": np.__version__,
        "config_hash": settings_hash(settings) if settings else None, "files": files,
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / f"metadata_{command}.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    started = time.time()
    try:
        settings = merge_settings(ns.command, load_config(ns.config), _cli_overrides(ns))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run = Run(settings)
    status = EXIT_OK
    try:
        COMMANDS[ns.command](run)
    except (ConfigError, ProfileError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    except (EllipticaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "command": ns.command,
                "config_hash": run.hash, "settings": settings}
        for attr in ("radius", "best_residual"):
            if hasattr(exc, attr):
                diag[attr] = getattr(exc, attr)
        diag["traceback"] = traceback.format_exception_only(type(exc), exc)
        eio.dump_json(diag, run.out / "error.json")
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    except ValueError as exc:
        # precondition violations of the library (dimension ranges, radii, ...)
        print(f"config error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    if status == EXIT_OK:
        run.finish()
    _write_metadata(run.out, ns.command, settings, started, time.time() - started, status, run.files)
    return status


if __name__ == "__main__":
    sys.exit(main())
