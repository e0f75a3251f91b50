"""Command-line interface: mesh inspection, solver checks, scenario runner.

Every subcommand writes a JSON report into the output directory and exits 0
exactly when all of its assertions pass.  Meshes are described by a JSON
spec; see `DEFAULT_MESH` for the schema.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import scenarios
from .calculus import Cochain, codifferential_matrix, d_matrix
from .cauchy import green_causal, solve_retarded, wave_residual
from .cohomology import cohomology, degeneracy_spacetime, degeneracy_surface, poincare_check
from .lattice import Axis, CellComplex, SpacetimeLattice, build_grid, spacetime
from .peierls import Observable, bracket, bracket_matrix, bracket_via_data, canonical_basis
from .scenarios import SCENARIO_NAMES, SCHEMA_VERSION, ScenarioConfig, write_report

DEFAULT_MESH = {
    "axes": [
        {"n_cells": 8, "spacing": 1.0, "periodic": True},
        {"n_cells": 6, "spacing": 1.0, "collar": 1},
    ],
    "punctures": [],
    "time": {"n_t": 10, "dt": 0.5, "collar": 2},
    "degree": 1,
}


# ---------------------------------------------------------------------------
# mesh spec parsing


def _field_error(where: str, msg: str):
    raise ValueError("mesh spec field '%s': %s" % (where, msg))


def parse_mesh_spec(d: dict):
    """(base complex, spacetime or None, degree) from a mesh spec dict."""
    if not isinstance(d, dict):
        raise ValueError("mesh spec root must be a JSON object")
    axes = []
    raw_axes = d.get("axes")
    if not isinstance(raw_axes, list) or not raw_axes:
        _field_error("axes", "expected a non-empty list of axis objects")
    for i, a in enumerate(raw_axes):
        if not isinstance(a, dict):
            _field_error("axes[%d]" % i, "expected an object")
        extra = set(a) - {"n_cells", "spacing", "periodic", "collar"}
        if extra:
            _field_error("axes[%d]" % i, "unknown keys %s" % sorted(extra))
        try:
            axes.append(Axis(int(a["n_cells"]), float(a.get("spacing", 1.0)),
                             periodic=bool(a.get("periodic", False)),
                             collar=int(a.get("collar", 0))))
        except (KeyError, TypeError, ValueError) as exc:
            _field_error("axes[%d]" % i, str(exc))
    punctures = []
    for j, box in enumerate(d.get("punctures", [])):
        try:
            punctures.append(tuple((int(lo), int(hi)) for lo, hi in box))
        except (TypeError, ValueError):
            _field_error("punctures[%d]" % j, "expected per-axis [lo, hi] pairs")
        if len(punctures[-1]) != len(axes):
            _field_error("punctures[%d]" % j, "needs one [lo, hi] pair per axis")
    base = build_grid(axes, punctures=punctures or None)
    M = None
    if "time" in d:
        t = d["time"]
        if not isinstance(t, dict):
            _field_error("time", "expected an object")
        try:
            M = spacetime(base, int(t["n_t"]), float(t["dt"]), int(t.get("collar", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            _field_error("time", str(exc))
    degree = d.get("degree", 1)
    if not isinstance(degree, int) or not (0 <= degree <= base.n + (M is not None)):
        _field_error("degree", "expected an integer form degree for this mesh")
    return base, M, degree


def load_mesh_spec(path: str | None):
    if path is None:
        return parse_mesh_spec(DEFAULT_MESH)
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError("mesh spec parse error at line %d column %d: %s"
                         % (exc.lineno, exc.colno, exc.msg)) from None
    return parse_mesh_spec(d)


def _report(args, name: str, payload: dict) -> int:
    payload = {"schema_version": SCHEMA_VERSION, "scenario": name,
               "seed": args.seed, **payload}
    path = write_report(args.out, name, payload)
    status = "PASS" if payload["passed"] else "FAIL"
    print("%s: %s (%s)" % (name, status, path))
    return 0 if payload["passed"] else 1


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_mesh_build(args) -> int:
    base, M, degree = load_mesh_spec(args.spec)
    K = M or base
    payload = {
        "dimension": K.n,
        "cells": [int(K.num(p)) for p in range(K.n + 1)],
        "collar_cells": [int((K.margin(p) == 0).sum()) for p in range(K.n + 1)],
        "core_cells": [int((K.margin(p) >= 3).sum()) for p in range(K.n + 1)],
        "has_time_axis": M is not None,
        "degree": degree,
        "passed": True,
    }
    return _report(args, "mesh-build", payload)


def cmd_cohomology(args) -> int:
    base, _, _ = load_mesh_spec(args.spec)
    rep_abs = cohomology(base, "absolute")
    rep_cpt = cohomology(base, "compact")
    dual = poincare_check(base)
    payload = {
        "absolute_dims": rep_abs.dims,
        "compact_dims": rep_cpt.dims,
        "poincare_duality": dual["ok"],
        "passed": bool(dual["ok"]),
    }
    return _report(args, "cohomology", payload)


def cmd_degeneracy(args) -> int:
    base, M, degree = load_mesh_spec(args.spec)
    surf = degeneracy_surface(base, degree)
    payload = {"degree": degree, "surface_dim": int(surf.dim)}
    ok = True
    if M is not None:
        st = degeneracy_spacetime(M, degree)
        payload["spacetime_dim"] = int(st.dim)
        ok = st.dim == surf.dim
    payload["passed"] = bool(ok)
    return _report(args, "degeneracy", payload)


def cmd_solve(args) -> int:
    base, M, degree = load_mesh_spec(args.spec)
    if M is None:
        raise ValueError("the solve command needs a mesh spec with a 'time' block")
    rng = np.random.default_rng(args.seed)
    src = np.zeros(M.num(degree))
    ok = np.where((M.margin(degree) >= 2) & (M.time_margin(degree) >= 3))[0]
    src[ok] = rng.standard_normal(ok.size)
    a = Cochain(M, degree, src)
    ret = solve_retarded(a)
    resid = wave_residual(ret, a)
    g = green_causal(a)
    gresid = wave_residual(g, Cochain(M, degree, np.zeros(M.num(degree))))
    payload = {
        "degree": degree,
        "retarded_residual": float(resid),
        "causal_homogeneous_residual": float(gresid),
        "passed": bool(resid <= args.tol and gresid <= args.tol),
    }
    return _report(args, "solve", payload)


def cmd_bracket(args) -> int:
    base, M, degree = load_mesh_spec(args.spec)
    if M is None:
        raise ValueError("the bracket command needs a mesh spec with a 'time' block")
    basis = canonical_basis(M, degree)
    bm = bracket_matrix(basis.observables(), tol=args.tol, workers=args.threads)
    obs = basis.observables()
    t0 = M.w_t + 2
    worst = 0.0
    rng = np.random.default_rng(args.seed)
    pairs = min(10, basis.dim * (basis.dim - 1) // 2)
    for _ in range(pairs):
        i, j = rng.integers(0, basis.dim, size=2)
        direct = bracket(obs[int(i)], obs[int(j)])
        sliced = bracket_via_data(obs[int(i)], obs[int(j)], t0)
        worst = max(worst, abs(direct - sliced))
    payload = {
        "degree": degree,
        "basis_dim": basis.dim,
        "radical_dim": int(bm.radical_dim),
        "slice_crosscheck_max": float(worst),
        "crosscheck_pairs": pairs,
        "passed": bool(worst <= 1e-9),
    }
    return _report(args, "bracket", payload)


def cmd_radical(args) -> int:
    if args.gauge == "sc":
        return _report(args, "radical-sc", scenarios.run_sc_gauge())
    base, M, degree = load_mesh_spec(args.spec)
    if M is None:
        raise ValueError("the radical command needs a mesh spec with a 'time' block")
    basis = canonical_basis(M, degree)
    bm = bracket_matrix(basis.observables(), tol=args.tol, workers=args.threads)
    deg = degeneracy_spacetime(M, degree)
    payload = {
        "degree": degree,
        "radical_dim": int(bm.radical_dim),
        "degeneracy_dim": int(deg.dim),
        "passed": bool(bm.radical_dim == deg.dim),
    }
    return _report(args, "radical", payload)


def cmd_quantize_center(args) -> int:
    return _report(args, "quantize-center",
                   scenarios.run_center(workers=args.threads))


def cmd_embed_check(args) -> int:
    return _report(args, "embed-check", scenarios.run_embed(workers=args.threads))


def cmd_scenario(args) -> int:
    if args.spec:
        cfg = ScenarioConfig.from_file(args.spec)
        if cfg.scenario != args.name:
            raise ValueError("config names scenario %r but the command line says %r"
                             % (cfg.scenario, args.name))
    else:
        cfg = ScenarioConfig(scenario=args.name)
    cfg.out_dir = args.out
    cfg.seed = args.seed
    cfg.workers = args.threads
    cfg.tolerance = args.tol if args.tol_set else cfg.tolerance
    cfg.gauge = args.gauge
    cfg.validate()
    report = scenarios.run(cfg)
    status = "PASS" if report["passed"] else "FAIL"
    print("scenario %s: %s" % (args.name, status))
    return 0 if report["passed"] else 1


def cmd_verify(args) -> int:
    return _report(args, "verify",
                   scenarios.run_verify(seed=args.seed, workers=args.threads))


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latticedec",
        description="Lattice p-form electromagnetism: solvers, brackets, "
                    "quantization and scenario reports.")
    ap.add_argument("--spec", help="path to a JSON mesh/scenario spec")
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--tol", type=float, default=None,
                    help="tolerance override for residual checks")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker count for parallel bracket assembly")
    ap.add_argument("--seed", type=int, default=0, help="random seed")
    ap.add_argument("--gauge", choices=["standard", "sc"], default="standard",
                    help="'sc' demonstrates the wrong-gauge-equivalence theory")
    sub = ap.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="mesh operations")
    mesh_sub = mesh.add_subparsers(dest="mesh_command", required=True)
    mesh_sub.add_parser("build", help="build and summarize a mesh").set_defaults(fn=cmd_mesh_build)

    sub.add_parser("cohomology", help="cohomology ranks and duality").set_defaults(fn=cmd_cohomology)
    sub.add_parser("degeneracy", help="degeneracy dimensions").set_defaults(fn=cmd_degeneracy)
    sub.add_parser("solve", help="causal wave solves and residuals").set_defaults(fn=cmd_solve)
    sub.add_parser("bracket", help="bracket matrix and slice cross-check").set_defaults(fn=cmd_bracket)
    sub.add_parser("radical", help="bracket radical vs degeneracy").set_defaults(fn=cmd_radical)

    quant = sub.add_parser("quantize", help="quantization checks")
    quant_sub = quant.add_subparsers(dest="quantize_command", required=True)
    quant_sub.add_parser("center", help="algebra center vs radical").set_defaults(fn=cmd_quantize_center)

    embed = sub.add_parser("embed", help="embedding morphism checks")
    embed_sub = embed.add_subparsers(dest="embed_command", required=True)
    embed_sub.add_parser("check", help="morphism kernels and obstruction").set_defaults(fn=cmd_embed_check)

    scen = sub.add_parser("scenario", help="run a named scenario")
    scen.add_argument("name", choices=SCENARIO_NAMES)
    scen.set_defaults(fn=cmd_scenario)

    sub.add_parser("verify", help="full invariant suite").set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.tol_set = args.tol is not None
    if args.tol is None:
        args.tol = 1e-9
    try:
        return args.fn(args)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
