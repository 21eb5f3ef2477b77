import json
import math

import numpy as np
import pytest

from elliptica.gallery import (EMPTY, FAIL, PARTIAL, PASS, bubble, closed_form_mesh, get_entry,
                               list_entries, liouville_2d, verify_entry)
from elliptica.model import make_builtin_nonlinearity, validate_profile

IDS = ["paraboloid", "tanh", "bubble", "singular_exp", "liouville_2d", "truncated",
       "constants", "halfspace_1d"]


@pytest.fixture(scope="module")
def reports():
    return {i: verify_entry(i) for i in IDS}


def test_catalog():
    entries = list_entries()
    assert [e.id for e in entries] == IDS
    assert len({e.tag for e in entries}) == len(entries)
    assert all(e.tag.startswith("gallery:") for e in entries)
    assert get_entry("bubble").default_dim == 3
    with pytest.raises(KeyError):
        get_entry("nope")


@pytest.mark.parametrize("entry_id", IDS)
def test_every_claim_checked(reports, entry_id):
    rep = reports[entry_id]
    names = [c.name for c in rep.claims]
    assert names == list(get_entry(entry_id).claims)
    assert rep.passed, [c for c in rep.claims if c.status == FAIL]
    json.dumps(rep.to_dict())


def test_paraboloid_flags(reports):
    rep = reports["paraboloid"]
    assert rep.status_of("stable") == PASS
    assert rep.status_of("not_bounded_below") == PASS


def test_tanh_flags(reports):
    assert reports["tanh"].status_of("sign_changing_f") == PASS
    assert reports["tanh"].status_of("residual") == PASS


def test_bubble_partial_morse(reports):
    rep = reports["bubble"]
    assert rep.status_of("morse_index_one") == PARTIAL
    morse = next(c for c in rep.claims if c.name == "morse_index_one")
    assert morse.observed == [1, 1, 1]


def test_singular_exp_threshold():
    assert verify_entry("singular_exp", dim=10).passed
    rep9 = verify_entry("singular_exp", dim=9)
    assert rep9.passed
    obs = next(c for c in rep9.claims if c.name == "stable_iff_N_ge_10").observed
    assert obs["hardy"] is False and obs["lambda1"] < -1e-3


def test_constants_exp_empty():
    rep = verify_entry("constants", name="exp")
    assert rep.status_of("stable_iff_df_nonpositive") == EMPTY
    assert rep.passed


def test_constants_allen_cahn(reports):
    obs = next(c for c in reports["constants"].claims).observed
    # ±1 are stable (f' = -2), 0 is not (f' = 1)
    assert obs[0.0]["lambda1"] < 0
    assert obs[1.0]["lambda1"] > 0 and obs[-1.0]["lambda1"] > 0


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_bubble_residual(N):
    f = make_builtin_nonlinearity("power", p=(N + 2) / (N - 2))
    rep = validate_profile(bubble(N, r_max=1e5), f, 1e-8)
    assert rep.passed


def test_bubble_scaling_preserves_solution():
    f = make_builtin_nonlinearity("power", p=5.0)
    p = bubble(3, r_max=1e4, scale=7.0)
    assert p.center_value == pytest.approx(math.sqrt(7.0))
    # residual is absolute and -Δu scales like λ^{(N+2)/2}
    assert validate_profile(p, f, 1e-8 * 7.0 ** 2.5).passed


def test_liouville_closed_form():
    p = liouville_2d()
    assert p.u[0] == pytest.approx(math.log(8.0))
    assert validate_profile(p, make_builtin_nonlinearity("exp"), 1e-8).passed


def test_closed_form_mesh_shape():
    m = closed_form_mesh(2.0, 1e3)
    assert m[0] == 0.0 and m[-1] == pytest.approx(1e3)
    d = np.diff(m)
    assert np.all(d > 0)
    core = d[m[1:] <= 0.4]
    assert np.allclose(core[:-1], d[0], rtol=1e-12)
    assert np.all(d[1:] / d[:-1] <= 1.01 + 1e-9)


def test_bubble_needs_dimension():
    with pytest.raises(ValueError):
        bubble(2)
