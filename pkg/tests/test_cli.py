import json

import pytest

from elliptica.cli import main, merge_settings, settings_hash
from elliptica.io import load_json


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_solve_outputs(tmp_path):
    assert run(tmp_path, "solve", "--dim", "3", "--nonlinearity", "power", "--p", "5",
               "--center", "1", "--r-max", "100", "--trajectory") == 0
    for name in ("profile.json", "profile.csv", "solve.json", "trajectory.csv",
                 "metadata_solve.json", "summary_solve.txt"):
        assert (tmp_path / name).exists(), name
    d = load_json(tmp_path / "solve.json")
    assert d["residual_pass"]
    assert len(d["provenance"]["config_hash"]) == 16


def test_byte_identical_json(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["solve", "--dim", "10", "--r-max", "100"]
    assert run(a, *args) == 0 and run(b, *args) == 0
    for name in ("profile.json", "solve.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[solve]\ndim = 4\nr_max = 50.0\n[nonlinearity]\nname = "power"\np = 3.0\n')
    assert run(tmp_path / "o", "solve", "--config", str(cfg), "--dim", "5") == 0
    d = load_json(tmp_path / "o" / "solve.json")
    assert d["dim"] == 5 and d["r_max"] == 50.0 and d["nonlinearity"] == "power(3)"


@pytest.mark.parametrize("cfg", ['[solve]\nbogus = 1\n', '[solve]\ndim = "x"\n', '[nope]\na = 1\n',
                                 'not toml ='])
def test_config_errors_exit_2(tmp_path, cfg):
    path = tmp_path / "c.toml"
    path.write_text(cfg)
    assert run(tmp_path, "solve", "--config", str(path)) == 2


def test_bad_flag_exit_2(tmp_path):
    assert run(tmp_path, "solve", "--dim", "x") == 2


def test_numerical_failure_exit_3(tmp_path):
    assert run(tmp_path, "solve", "--nonlinearity", "constant", "--c", "-100") == 3
    err = load_json(tmp_path / "error.json")
    assert err["error"] == "BlowUp"
    assert err["radius"] == pytest.approx(2449.49, rel=1e-4)


def test_env_overrides_out(tmp_path, monkeypatch):
    target = tmp_path / "env"
    monkeypatch.setenv("ELLIPTICA_OUT", str(target))
    assert main(["solve", "--r-max", "10", "--out", str(tmp_path / "flag")]) == 0
    assert (target / "solve.json").exists()
    assert not (tmp_path / "flag").exists()


def test_hash_ignores_out_and_jobs():
    a = merge_settings("solve", {}, {"common": {"out": "x", "jobs": 1}})
    b = merge_settings("solve", {}, {"common": {"out": "y", "jobs": 4}})
    c = merge_settings("solve", {}, {"solve": {"dim": 4}})
    assert settings_hash(a) == settings_hash(b) != settings_hash(c)


def test_gallery_verify_bubble(tmp_path):
    assert run(tmp_path, "gallery", "verify", "--id", "bubble", "--dim", "3") == 0
    d = load_json(tmp_path / "gallery_bubble.json")
    assert d["passed"]
    assert {c["name"]: c["status"] for c in d["claims"]}["residual"] == "pass"


def test_gallery_list(tmp_path):
    assert run(tmp_path, "gallery", "list") == 0
    cat = load_json(tmp_path / "gallery_catalog.json")
    assert len(cat["entries"]) == 8


def test_spectrum_singular(tmp_path):
    assert run(tmp_path, "spectrum", "--dim", "10", "--singular") == 0
    d = load_json(tmp_path / "spectrum.json")
    assert min(d["lambda1"]) >= -1e-4
    assert (tmp_path / "spectrum.csv").exists()


def test_inequality_on_saved_profile(tmp_path):
    prof = tmp_path / "p"
    assert run(prof, "solve", "--dim", "10", "--r-max", "2000", "--mesh-ratio", "1.01") == 0
    assert run(tmp_path / "i", "inequality", "--dim", "10", "--zeta", "thm1",
               "--profile", str(prof / "profile.json")) == 0
    for res in (1, 2):
        d = load_json(tmp_path / "i" / f"ledger_radial_22_r{res}.json")
        assert d["slack"] >= -d["quadrature_error"]


def test_profile_dimension_mismatch(tmp_path):
    prof = tmp_path / "p"
    assert run(prof, "solve", "--dim", "3", "--r-max", "10") == 0
    assert run(tmp_path / "i", "inequality", "--dim", "10",
               "--profile", str(prof / "profile.json")) == 2


def test_decay_and_report(tmp_path):
    assert run(tmp_path, "decay", "--dim", "3", "--closed-form", "bubble") == 0
    d = load_json(tmp_path / "decay.json")
    assert all(f["verdict"] == "pass" for f in d["fits"])
    assert run(tmp_path, "report", "--input", str(tmp_path)) == 0
    text = (tmp_path / "report.md").read_text()
    assert "sup_deviation" in text
    svg = (tmp_path / "decay.svg").read_bytes()
    assert b"config " in svg
    # plots are reproducible byte for byte
    assert run(tmp_path / "r2", "report", "--input", str(tmp_path)) == 0
    assert (tmp_path / "r2" / "decay.svg").read_bytes() == svg


def test_symmetry_coarse(tmp_path):
    assert run(tmp_path, "symmetry", "--h", "1/16") == 0
    d = load_json(tmp_path / "symmetry.json")
    assert all(a["symmetric"] for a in d["axes"])
    assert (tmp_path / "grid.csv").exists()
