import json
import math

import numpy as np
import pytest

from conftest import constant_profile
from elliptica import io as eio
from elliptica.gallery import bubble
from elliptica.inequality_lab import evaluate_radial_22, zeta_theorem1
from elliptica.model import Disk, ProfileError, SpectralReport
from elliptica.symmetry import grid_from_function


def test_profile_json_roundtrip(tmp_path):
    p = bubble(3, r_max=1e3)
    path = eio.write_profile_json(p, tmp_path / "p.json")
    q = eio.read_profile_json(path)
    assert q.dim == 3
    np.testing.assert_array_equal(q.mesh, p.mesh)
    np.testing.assert_array_equal(q.u, p.u)
    np.testing.assert_array_equal(q.du, p.du)
    np.testing.assert_array_equal(q.d2u, p.d2u)
    assert q.center_value == p.center_value
    # byte-identical on rewrite
    again = eio.write_profile_json(q, tmp_path / "q.json")
    assert path.read_bytes() == again.read_bytes()


def test_profile_csv_roundtrip(tmp_path):
    p = bubble(4, r_max=1e3)
    path = eio.write_profile_csv(p, tmp_path / "p.csv")
    q = eio.read_profile_csv(path, 4)
    np.testing.assert_array_equal(q.u, p.u)
    np.testing.assert_array_equal(q.du, p.du)


def test_profile_wrong_schema():
    with pytest.raises(ProfileError):
        eio.profile_from_dict({"schema": "other"})


def test_nonfinite_encoded(tmp_path):
    path = eio.dump_json({"a": math.inf, "b": [math.nan, -math.inf], "c": np.float64(1.5)},
                         tmp_path / "x.json")
    d = json.loads(path.read_text())
    assert d == {"a": "inf", "b": ["nan", "-inf"], "c": 1.5}


def test_grid_roundtrip(tmp_path):
    g = grid_from_function(lambda X, Y: np.exp(-X ** 2 - Y ** 2), Disk(4.0), 1 / 16)
    d = json.loads(json.dumps(eio.grid_to_dict(g)))
    h = eio.grid_from_dict(d)
    np.testing.assert_array_equal(h.u, g.u)
    assert h.geometry == g.geometry and h.bc is g.bc
    path = eio.write_grid_csv(g, tmp_path / "g.csv")
    rows = path.read_text().splitlines()
    assert rows[0] == "x,y,u"
    assert len(rows) - 1 == int(np.sum(g.inside()))


def test_spectral_roundtrip(tmp_path):
    s = SpectralReport(10, (1.0, 2.0), (0.5, -0.1), (0, 1), 2048, math.inf, 1e-6)
    d = json.loads(json.dumps(eio.spectral_to_dict(s, note="x")))
    assert d["note"] == "x"
    assert eio.spectral_from_dict(d) == s
    lines = eio.write_spectral_csv(s, tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "R,lambda1,neg_count" and len(lines) == 3


def test_ledger_json(tmp_path):
    led = evaluate_radial_22(constant_profile(10, 1.0, r_max=3000.0), zeta_theorem1(5, 50))
    d = eio.load_json(eio.write_ledger_json(led, tmp_path / "l.json"))
    assert d["schema"] == eio.LEDGER_SCHEMA
    assert d["verdict"] == "indeterminate"
    assert set(d["terms"]) == set(led.terms)
