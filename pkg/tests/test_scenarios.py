"""Scenario drivers: profiles, configs, report plumbing, cheap end-to-end runs."""

import json

import numpy as np
import pytest

from latticedec.scenarios import (
    Profile,
    ScenarioConfig,
    block_cochain,
    bump_profile,
    cylinder_spacetime,
    run,
    run_ab,
    run_gauss,
    run_sc_gauge,
    run_two_puncture,
    verify_identities,
    write_report,
)


# -- profiles -----------------------------------------------------------------


def test_bump_profile_support_and_mass():
    f = bump_profile("bump", 1.0, 0.4)
    lo, hi = f.support()
    assert (lo, hi) == (0.6, 1.4)
    assert f(1.0) > 0
    assert f(0.59) == 0.0 == f(1.41)
    assert 0 < f.mass() < (hi - lo)  # bounded by max value 1 * support length


def test_grid_mass_converges_to_quadrature():
    f = bump_profile("bump", 1.0, 0.4)
    exact = f.mass()
    errs = [abs(f.grid_mass(2.0 / n, n + 1) - exact) for n in (16, 32, 64, 128)]
    assert errs[-1] < errs[0]
    assert errs[-1] <= 1e-4 * exact


def test_odd_profile_has_zero_mass():
    g = bump_profile("dbump", 1.0, 0.4)
    assert abs(g.mass()) <= 1e-12
    assert abs(g(0.8) + g(1.2)) <= 1e-15  # odd around the center


def test_profile_validation():
    with pytest.raises(ValueError):
        bump_profile("gauss", 1.0, 0.4)
    with pytest.raises(ValueError):
        bump_profile("bump", 1.0, -0.1)


def test_block_cochain_scales_with_volume():
    M = cylinder_spacetime(6, 5, 8, 3.0, 2.0, 2.0)
    a = block_cochain(M, 1, (0, 1, 0), lambda t, phi, y: np.ones_like(t))
    nz = a.values[np.abs(a.values) > 0]
    assert np.allclose(nz, 3.0 / 6)  # phi edge length


# -- cheap end-to-end runs ----------------------------------------------------


def test_ab_coarse_run():
    rep = run_ab(resolutions=((12, 8, 16), (24, 16, 32)), with_3d=False,
                 with_odd=True, tol=0.05)
    assert len(rep["table"]) == 2
    errs = [row["relative_error"] for row in rep["table"]]
    assert errs[1] < errs[0]
    # the discrete pairing equals the grid quadrature to roundoff
    for row in rep["table"]:
        assert row["quadrature_mismatch"] <= 1e-12
    assert abs(rep["odd_profile"]["value"]) <= 1e-12
    assert len(rep["observed_orders"]) == 1


def test_gauss_coarse_run():
    rep = run_gauss(resolutions=((24, 16, 32),), tol=0.05, bracket_tol=1e-10)
    row = rep["table"][0]
    assert row["relative_error"] <= 0.05
    assert rep["degenerate_certified"]


def test_two_puncture_law_exact():
    rep = run_two_puncture(n=12)
    assert rep["passed"]
    assert rep["degeneracy_dim"] == 1
    for case in rep["cases"]:
        assert case["membership_solve_trivial"] == case["law_predicts_trivial"]
        assert case["agrees"]
    verdicts = {case["membership_solve_trivial"] for case in rep["cases"]}
    assert verdicts == {True, False}  # both outcomes must be exercised


def test_sc_gauge_mode():
    rep = run_sc_gauge()
    assert rep["passed"]
    assert rep["standard_degeneracy_dim"] == 1
    assert rep["sc_degeneracy_dim"] == 0
    assert rep["sc_trivial"] and not rep["standard_trivial"]
    assert not rep["pushforward_sc_trivial"]
    assert not rep["pushforward_triviality_preserved"]


def test_identity_suite_is_fast_and_tight():
    import time
    t0 = time.monotonic()
    rep = verify_identities(seed=3)
    assert time.monotonic() - t0 < 60
    assert rep["passed"]
    assert rep["geometries"] >= 5
    assert all(v <= 1e-12 for v in rep["residuals"].values())


# -- configuration ------------------------------------------------------------


def test_config_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"scenario": "ab", "flux": 1.5,
                                "resolutions": [[12, 8, 16]]}))
    cfg = ScenarioConfig.from_file(str(path))
    assert cfg.scenario == "ab" and cfg.flux == 1.5


def test_config_unknown_field():
    with pytest.raises(ValueError, match="unknown field"):
        ScenarioConfig.from_dict({"scenario": "ab", "fluxx": 1.0})


def test_config_wrong_type():
    with pytest.raises(ValueError, match="expected.*got"):
        ScenarioConfig.from_dict({"scenario": "ab", "flux": "big"})


def test_config_bad_scenario_name():
    with pytest.raises(ValueError):
        ScenarioConfig.from_dict({"scenario": "abba"})


def test_config_bad_gauge():
    with pytest.raises(ValueError):
        ScenarioConfig.from_dict({"scenario": "ab", "gauge": "unitary"})


def test_config_parse_error_has_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"scenario": "ab",}')
    with pytest.raises(ValueError, match=r"line 1 column"):
        ScenarioConfig.from_file(str(path))


def test_config_converge_needs_increasing_resolutions():
    with pytest.raises(ValueError):
        ScenarioConfig.from_dict({"scenario": "converge",
                                  "resolutions": [[24, 16, 32], [12, 8, 16]]})


def test_run_and_write_report(tmp_path):
    cfg = ScenarioConfig.from_dict({"scenario": "two-puncture",
                                    "out_dir": str(tmp_path)})
    rep = run(cfg)
    assert rep["passed"]
    assert rep["schema_version"]
    data = json.loads((tmp_path / "two-puncture.json").read_text())
    assert data["scenario"] == "two-puncture"


def test_write_report_emits_csv(tmp_path):
    rep = {"schema_version": "1", "scenario": "ab", "seed": 0, "passed": True,
           "table": [{"resolution": "4x4x4", "value": 1.0, "reference": 1.0,
                      "relative_error": 0.0, "observed_order": None}]}
    write_report(str(tmp_path), "ab", rep)
    assert (tmp_path / "ab.json").exists()
    csv_text = (tmp_path / "ab.csv").read_text()
    assert "resolution" in csv_text and "4x4x4" in csv_text
