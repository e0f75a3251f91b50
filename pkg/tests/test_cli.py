"""End-to-end tests for the ``latticedec`` command-line interface.

Each subcommand is driven through :func:`latticedec.cli.main` in-process so
exit codes, printed status lines and emitted report files can all be checked.
"""

import json
import os

import pytest

from latticedec import cli


def run_cli(argv, tmp_path):
    return cli.main(["--out", str(tmp_path)] + argv)


def load_report(tmp_path, name):
    path = os.path.join(str(tmp_path), name + ".json")
    assert os.path.exists(path), "no report file %s" % path
    with open(path) as fh:
        return json.load(fh)


def write_mesh_spec(tmp_path, spec):
    path = tmp_path / "mesh.json"
    path.write_text(json.dumps(spec))
    return str(path)


SMALL_MESH = {
    "axes": [
        {"n_cells": 8, "spacing": 0.5, "periodic": True},
        {"n_cells": 6, "spacing": 0.5, "collar": 1},
    ],
    "time": {"n_t": 10, "dt": 0.2, "collar": 2},
    "degree": 1,
}


def test_mesh_build_default(tmp_path, capsys):
    assert run_cli(["mesh", "build"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "mesh-build: PASS" in out
    rep = load_report(tmp_path, "mesh-build")
    assert rep["dimension"] == 3
    assert rep["has_time_axis"] is True
    assert len(rep["cells"]) == 4
    assert all(c > 0 for c in rep["cells"])


def test_cohomology_annulus(tmp_path):
    spec = write_mesh_spec(tmp_path, SMALL_MESH)
    assert run_cli(["--spec", spec, "cohomology"], tmp_path) == 0
    rep = load_report(tmp_path, "cohomology")
    assert rep["absolute_dims"] == [1, 1, 0]
    assert rep["poincare_duality"] is True


def test_degeneracy_matches_surface(tmp_path):
    spec = write_mesh_spec(tmp_path, SMALL_MESH)
    assert run_cli(["--spec", spec, "degeneracy"], tmp_path) == 0
    rep = load_report(tmp_path, "degeneracy")
    assert rep["surface_dim"] == 1
    assert rep["spacetime_dim"] == 1


def test_solve_residuals(tmp_path):
    spec = write_mesh_spec(tmp_path, SMALL_MESH)
    assert run_cli(["--spec", spec, "solve"], tmp_path) == 0
    rep = load_report(tmp_path, "solve")
    assert rep["retarded_residual"] <= 1e-9
    assert rep["causal_homogeneous_residual"] <= 1e-9


def test_solve_requires_time_block(tmp_path, capsys):
    spec = write_mesh_spec(
        tmp_path, {"axes": SMALL_MESH["axes"], "degree": 1})
    assert run_cli(["--spec", spec, "solve"], tmp_path) == 2
    assert "time" in capsys.readouterr().err


def test_bracket_crosscheck(tmp_path):
    spec = write_mesh_spec(tmp_path, SMALL_MESH)
    assert run_cli(["--spec", spec, "bracket"], tmp_path) == 0
    rep = load_report(tmp_path, "bracket")
    assert rep["slice_crosscheck_max"] <= 1e-9
    assert rep["basis_dim"] >= 1


def test_radical_matches_degeneracy(tmp_path):
    spec = write_mesh_spec(tmp_path, SMALL_MESH)
    assert run_cli(["--spec", spec, "radical"], tmp_path) == 0
    rep = load_report(tmp_path, "radical")
    assert rep["radical_dim"] == rep["degeneracy_dim"] == 1


def test_radical_sc_gauge(tmp_path):
    assert run_cli(["--gauge", "sc", "radical"], tmp_path) == 0
    rep = load_report(tmp_path, "radical-sc")
    assert rep["standard_trivial"] is False
    assert rep["sc_trivial"] is True
    assert rep["pushforward_triviality_preserved"] is False


def test_scenario_two_puncture(tmp_path, capsys):
    assert run_cli(["scenario", "two-puncture"], tmp_path) == 0
    assert "scenario two-puncture: PASS" in capsys.readouterr().out
    rep = load_report(tmp_path, "two-puncture")
    assert rep["degeneracy_dim"] == rep["degeneracy_expected"]


def test_scenario_config_override(tmp_path, capsys):
    cfg = tmp_path / "gauss.json"
    cfg.write_text(json.dumps({
        "scenario": "gauss",
        "charge": 2.0,
        "resolutions": [[24, 16, 32]],
    }))
    assert run_cli(["--spec", str(cfg), "scenario", "gauss"], tmp_path) == 0
    rep = load_report(tmp_path, "gauss")
    assert rep["charge"] == 2.0
    assert len(rep["table"]) == 1


def test_scenario_name_mismatch(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "gauss"}))
    assert run_cli(["--spec", str(cfg), "scenario", "ab"], tmp_path) == 2
    err = capsys.readouterr().err
    assert "gauss" in err and "ab" in err


def test_unknown_scenario_name_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(["scenario", "nonsense"], tmp_path)
    assert exc.value.code == 2


def test_bad_config_type_is_reported(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "ab", "flux": "x"}))
    assert run_cli(["--spec", str(cfg), "scenario", "ab"], tmp_path) == 2
    assert "flux" in capsys.readouterr().err


def test_bad_json_reports_location(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"scenario": "ab",}')
    assert run_cli(["--spec", str(cfg), "scenario", "ab"], tmp_path) == 2
    assert "line 1" in capsys.readouterr().err


def test_bad_mesh_spec_field(tmp_path, capsys):
    spec = write_mesh_spec(tmp_path, {"axes": [], "degree": 1})
    assert run_cli(["--spec", spec, "cohomology"], tmp_path) == 2
    assert "axes" in capsys.readouterr().err


def test_report_carries_seed_and_schema(tmp_path):
    assert run_cli(["--seed", "7", "mesh", "build"], tmp_path) == 0
    rep = load_report(tmp_path, "mesh-build")
    assert rep["seed"] == 7
    assert "schema_version" in rep
