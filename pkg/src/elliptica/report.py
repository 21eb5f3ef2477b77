"""Aggregate CLI outputs into a summary table and standalone SVG plots.

The SVGs are written with a fixed hash salt and no date stamp, so the same
inputs reproduce the same bytes.  The settings hash is embedded as the
document description.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .io import LEDGER_SCHEMA, PROFILE_SCHEMA, SPECTRAL_SCHEMA


def _num(x):
    if isinstance(x, str):
        return {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}[x]
    return x


def _collect(src: Path) -> dict:
    docs = {"profiles": [], "spectra": [], "ledgers": [], "decay": [], "gallery": [], "symmetry": []}
    for path in sorted(src.glob("*.json")):
        if path.name.startswith(("metadata_", "error")):
            continue
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        schema = d.get("schema")
        if schema == PROFILE_SCHEMA and d.get("kind") == "radial":
            docs["profiles"].append((path.stem, d))
        elif schema == SPECTRAL_SCHEMA:
            docs["spectra"].append((path.stem, d))
        elif schema == LEDGER_SCHEMA:
            docs["ledgers"].append((path.stem, d))
        elif "fits" in d:
            docs["decay"].append((path.stem, d))
        elif "claims" in d and "entry" in d:
            docs["gallery"].append((path.stem, d))
        elif "axes" in d and "radial_deviation" in d:
            docs["symmetry"].append((path.stem, d))
    return docs


def _table(docs) -> list[str]:
    rows = ["| item | quantity | value | verdict |", "|---|---|---|---|"]
    for name, d in docs["spectra"]:
        lam = [_num(v) for v in d["lambda1"]]
        rows.append(f"| {name} | min lambda1 over {len(lam)} domains | {min(lam):+.4e} | "
                    f"max neg_count {max(d['neg_count'])} |")
    for name, d in docs["ledgers"]:
        rows.append(f"| {name} | slack (err {_num(d['quadrature_error']):.1e}) | "
                    f"{_num(d['slack']):+.4e} | {d['verdict']} |")
    for name, d in docs["decay"]:
        for fit in d["fits"]:
            rows.append(f"| {d['profile']} | {fit['quantity']} exponent (bound {_num(fit['bound']):+.3f}) | "
                        f"{_num(fit['exponent']):+.4f} | {fit['verdict']} |")
        if "l2star" in d:
            rows.append(f"| {d['profile']} | L^2* norm | {_num(d['l2star']['value']):.5g} | "
                        f"{d['l2star']['verdict']} |")
    for name, d in docs["gallery"]:
        bad = [c["name"] for c in d["claims"] if c["status"] == "fail"]
        rows.append(f"| gallery {d['entry']} (N={d['dim']}) | claims | {len(d['claims'])} | "
                    f"{'pass' if d['passed'] else 'fail: ' + ', '.join(bad)} |")
    for name, d in docs["symmetry"]:
        nsym = sum(a["symmetric"] for a in d["axes"])
        rows.append(f"| symmetry h={d['h']:.5g} | radial deviation / h^2 | "
                    f"{_num(d['deviation_over_h2']):.4f} | {nsym}/{len(d['axes'])} axes symmetric |")
    return rows


def _savefig(fig, path, tag):
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": f"config {tag}"})


def build_report(src: Path, out: Path, tag: str, plots: bool = True):
    docs = _collect(Path(src))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows = _table(docs)
    md = out / "report.md"
    md.write_text("# elliptica report\n\n" + "\n".join(rows) + "\n")
    files = [str(md)]
    if not plots:
        return rows, files
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "elliptica"

    if docs["profiles"]:
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, d in docs["profiles"]:
            r, u = np.array(d["r"]), np.array(d["u"])
            ax.plot(r[1:], u[1:], label=f"{name} (N={d['dim']})")
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel("u")
        ax.legend(fontsize=7)
        p = out / "profiles.svg"
        _savefig(fig, p, tag)
        plt.close(fig)
        files.append(str(p))
    if docs["spectra"]:
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, d in docs["spectra"]:
            ax.plot([_num(v) for v in d["radii"]], [_num(v) for v in d["lambda1"]], "o-",
                    label=f"{name} (N={d['dim']})")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xscale("log")
        ax.set_xlabel("R")
        ax.set_ylabel("lambda1")
        ax.legend(fontsize=7)
        p = out / "lambda1.svg"
        _savefig(fig, p, tag)
        plt.close(fig)
        files.append(str(p))
    fitted = [(d["profile"], f) for _, d in docs["decay"] for f in d["fits"] if f["radii"]]
    if fitted:
        fig, ax = plt.subplots(figsize=(6, 4))
        for pid, fit in fitted:
            R = np.array([_num(v) for v in fit["radii"]])
            V = np.array([_num(v) for v in fit["values"]])
            line, = ax.plot(R, V, "o", ms=3, label=f"{pid} {fit['quantity']}")
            e, C = _num(fit["exponent"]), _num(fit["constant"])
            if math.isfinite(e) and math.isfinite(C):
                ax.plot(R, C * R ** e, "-", color=line.get_color(), lw=0.8)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("R")
        ax.legend(fontsize=7)
        p = out / "decay.svg"
        _savefig(fig, p, tag)
        plt.close(fig)
        files.append(str(p))
    return rows, files
