"""Named physics scenarios with machine-readable reports.

Each scenario builds a lattice, discretizes the relevant smearing forms and
field configurations, and compares lattice pairings against closed-form
reference values.  Reference values carry a provenance label:

    "formula"    -- closed-form continuum value of the modeled pairing,
    "quadrature" -- the same value under the lattice's own quadrature,
    "oracle"     -- numerically integrated (scipy.integrate.quad) reference.

Sign normalization: the lattice pairing weights use the (+,-,-,...,-)
signature, while the reference values are quoted in the (-,+,...,+)
convention; for the degree-1 pairings reported here the two differ by an
overall minus sign, which the scenarios fold into the reported value.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.sparse.linalg import lsqr

from . import _exact
from .calculus import Cochain, codifferential_matrix, d_matrix, pair
from .cauchy import green_causal, holonomy_winding
from .cohomology import degeneracy_spacetime, degeneracy_surface
from .lattice import Axis, CellComplex, SpacetimeLattice, build_grid, spacetime
from .peierls import Observable, bracket_matrix, canonical_basis
from .weyl import StarAlgebra, center_basis

SCHEMA_VERSION = "1"

SCENARIO_NAMES = ("ab", "gauss", "two-puncture", "center", "embed",
                  "converge", "verify")


# ---------------------------------------------------------------------------
# profiles


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
    return out


def _dbump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2)) * (-2.0 * u[m] / (1.0 - u[m] ** 2) ** 2)
    return out


_PROFILES = {"bump": _bump, "dbump": _dbump}


@dataclass(frozen=True)
class Profile:
    """A compactly supported smooth profile x -> g((x - center)/width)."""

    name: str
    center: float
    width: float

    def __call__(self, x):
        return _PROFILES[self.name]((np.asarray(x, float) - self.center) / self.width)

    def support(self):
        return (self.center - self.width, self.center + self.width)

    def mass(self) -> float:
        """High-accuracy integral of the profile (oracle quadrature)."""
        lo, hi = self.support()
        val, _ = quad(lambda x: float(self(x)), lo, hi, epsabs=1e-15, limit=400)
        return val

    def grid_mass(self, spacing: float, n_nodes: int, origin: float = 0.0) -> float:
        """The integral under the lattice quadrature: spacing * sum over nodes.

        This is the quadrature implied by sampling the profile on lattice
        vertices and pairing with unit dual volumes, so lattice pairings of
        product profiles factor exactly into products of grid masses.
        """
        x = origin + spacing * np.arange(n_nodes)
        return spacing * float(self(x).sum())


def bump_profile(name: str, center: float, width: float) -> Profile:
    if name not in _PROFILES:
        raise ValueError("unknown profile %r (choose from %s)" % (name, sorted(_PROFILES)))
    if width <= 0:
        raise ValueError("profile width must be positive")
    return Profile(name, center, width)


def _check_fits(profile: Profile, lo: float, hi: float, label: str):
    a, b = profile.support()
    if a < lo or b > hi:
        raise ValueError("%s profile support (%g, %g) leaves the domain (%g, %g)"
                         % (label, a, b, lo, hi))


# ---------------------------------------------------------------------------
# lattice helpers


def block_cochain(M: CellComplex, p: int, type_: tuple, fn) -> Cochain:
    """Cochain supported on one cell block, sampled at cell centers.

    `fn` receives one physical center coordinate array per axis and returns
    the integrand value; the result is scaled by the cell volume, i.e. the
    cochain holds approximate integrals of the sampled density over cells.
    """
    blk = M.blocks[type_]
    pos = np.indices(blk.shape).astype(float)
    coords = []
    vol = 1.0
    for a, ax in enumerate(M.axes):
        c = (pos[a] + 0.5 * type_[a]) * ax.spacing
        coords.append(c)
        if type_[a]:
            vol *= ax.spacing
    vals = np.zeros(M.num(p))
    v = np.asarray(fn(*coords), dtype=float) * vol
    vals[blk.ids[blk.kept]] = np.broadcast_to(v, blk.shape)[blk.kept]
    return Cochain(M, p, vals)


def cylinder_spacetime(n_phi: int, n_y: int, n_t: int, circumference: float,
                       width: float, t_span: float, collar: int = 2,
                       collar_t: int = 2) -> SpacetimeLattice:
    """Time interval x (circle x interval) product lattice."""
    base = build_grid([Axis(n_phi, circumference / n_phi, periodic=True),
                       Axis(n_y, width / n_y, collar=collar)])
    return spacetime(base, n_t, t_span / n_t, collar_t)


def _observed_orders(errors):
    out = []
    for i in range(1, len(errors)):
        if errors[i] <= 0 or errors[i - 1] <= 0:
            out.append(float("inf"))
        else:
            out.append(float(np.log2(errors[i - 1] / errors[i])))
    return out


# ---------------------------------------------------------------------------
# Aharonov-Bohm scenario: holonomy observable on a spatial circle factor


def ab_observable(M: SpacetimeLattice, f_y: Profile, f_t: Profile) -> Observable:
    """Holonomy smearing along the periodic axis, modulated across (y, t).

    The cochain lives on spatial edges of the periodic axis with value
    f(y) f(t) per unit length; it is exactly co-closed because the value is
    constant around the circle and no other components are present.
    """
    def fn(t, phi, y):
        return f_y(y) * f_t(t)
    alpha = block_cochain(M, 1, (0, 1, 0), fn)
    return Observable(alpha)


def ab_configuration(M: SpacetimeLattice, flux: float) -> Cochain:
    """Closed, non-exact potential with holonomy `flux` around the circle."""
    circumference = M.axes[1].n_cells * M.axes[1].spacing
    type_ = (0, 1) + (0,) * (M.n - 2)
    A = block_cochain(M, 1, type_, lambda *coords: flux / circumference)
    assert np.abs(d_matrix(M, 1) @ A.values).max() == 0.0
    assert np.abs(codifferential_matrix(M, 1) @ A.values).max() == 0.0
    return A


def ab_observable_3d(M: SpacetimeLattice, f_y: Profile, f_z: Profile,
                     f_t: Profile) -> Observable:
    def fn(t, phi, y, z):
        return f_y(y) * f_z(z) * f_t(t)
    alpha = block_cochain(M, 1, (0, 1, 0, 0), fn)
    return Observable(alpha)


def run_ab(resolutions=((24, 16, 32), (48, 32, 64), (96, 64, 128)),
           flux: float = 2.5, profile: Profile = None,
           circumference: float = 3.0, width: float = 2.0, t_span: float = 2.0,
           with_3d: bool = True, with_odd: bool = True, tol: float = 0.02) -> dict:
    """Holonomy pairing convergence toward flux * (profile mass)^(n-1)."""
    f = profile or bump_profile("bump", 1.0, 0.4)
    _check_fits(f, 0.0, width, "radial")
    _check_fits(f, 0.0, t_span, "time")
    mass = f.mass()
    reference = flux * mass ** 2
    rows, errors = [], []
    for (n_phi, n_y, n_t) in resolutions:
        M = cylinder_spacetime(n_phi, n_y, n_t, circumference, width, t_span)
        obs = ab_observable(M, f, f)
        A = ab_configuration(M, flux)
        value = -obs.evaluate(A)      # signature normalization, see module doc
        quad_ref = flux * f.grid_mass(width / n_y, n_y + 1) \
            * f.grid_mass(t_span / n_t, n_t + 1)
        err = abs(value - reference) / abs(reference)
        errors.append(err)
        rows.append({
            "resolution": "%dx%dx%d" % (n_phi, n_y, n_t),
            "value": value,
            "reference": reference,
            "relative_error": err,
            "quadrature_reference": quad_ref,
            "quadrature_mismatch": abs(value - quad_ref) / abs(reference),
        })
    orders = _observed_orders(errors)
    for row, o in zip(rows[1:], orders):
        row["observed_order"] = o
    report = {
        "flux": flux,
        "profile": {"name": f.name, "center": f.center, "width": f.width},
        "profile_mass": {"value": mass, "provenance": "oracle"},
        "reference": {"value": reference, "provenance": "formula",
                      "formula": "flux * mass^2"},
        "table": rows,
        "observed_orders": orders,
        "passed": bool(errors[-1] <= tol and all(o >= 1.0 for o in orders)),
    }
    if with_odd:
        g = bump_profile("dbump", f.center, f.width)
        n_phi, n_y, n_t = resolutions[0]
        M = cylinder_spacetime(n_phi, n_y, n_t, circumference, width, t_span)
        obs = ab_observable(M, g, f)
        val = -obs.evaluate(ab_configuration(M, flux))
        report["odd_profile"] = {
            "value": val,
            "reference": {"value": 0.0, "provenance": "formula",
                          "formula": "odd profile has zero mass"},
            "passed": bool(abs(val) <= 1e-12 * abs(reference)),
        }
        report["passed"] = bool(report["passed"] and report["odd_profile"]["passed"])
    if with_3d:
        n, n_t3 = 16, 32
        base = build_grid([Axis(n, circumference / n, periodic=True),
                           Axis(n, width / n, collar=2),
                           Axis(n, width / n, collar=2)])
        M3 = spacetime(base, n_t3, t_span / n_t3, 2)
        obs3 = ab_observable_3d(M3, f, f, f)
        val3 = -obs3.evaluate(ab_configuration(M3, flux))
        ref3 = flux * mass ** 3
        report["run_3d"] = {
            "resolution": "%dx%dx%dx%d" % (n, n, n, n_t3),
            "value": val3,
            "reference": {"value": ref3, "provenance": "formula",
                          "formula": "flux * mass^3"},
            "relative_error": abs(val3 - ref3) / abs(ref3),
            "passed": bool(abs(val3 - ref3) / abs(ref3) <= 0.10),
        }
        report["passed"] = bool(report["passed"] and report["run_3d"]["passed"])
    return report


# ---------------------------------------------------------------------------
# Gauss-law scenario: a bracket-null observable with a nonzero value


def gauss_observable(M: SpacetimeLattice, f: Profile, tau: Profile):
    """Monopole-flux observable nu = delta(alpha') from a radial 2-form.

    alpha' carries f(y) tau(t) on (time x radial) plaquettes; nu is exactly
    co-closed by delta^2 = 0 and measures the flux through the circle that
    encloses the removed end of the radial axis.  The generator sign is
    chosen so the pairing against the monopole configuration is positive
    (the lattice codifferential at this degree is the negative of the
    reference convention's).
    """
    def fn(t, phi, y):
        return f(y) * tau(t)
    alpha2 = block_cochain(M, 2, (1, 0, 1), fn)
    nu = Cochain(M, 1, codifferential_matrix(M, 2) @ alpha2.values)
    return Observable(nu), alpha2


def gauss_configuration(M: SpacetimeLattice, charge: float) -> Cochain:
    """Static potential of a charge behind the removed end: (Q/L) y dt."""
    circumference = M.axes[1].n_cells * M.axes[1].spacing
    A = block_cochain(M, 1, (1, 0, 0), lambda t, phi, y: charge * y / circumference)
    # source-free: both the field equation and the Lorenz condition hold
    # away from the radial ends
    bulk0 = M.margin(0) >= 1
    assert np.abs((codifferential_matrix(M, 1) @ A.values)[bulk0]).max() < 1e-12
    return A


def gauss_certificates(nu: Observable, rng, n_probes: int = 100) -> dict:
    """Degeneracy certificates for nu from a single causal solve.

    * probe brackets: pairings of G(nu) against random co-closed compactly
      supported observables (each is delta of a random core 2-cochain);
    * gauge fit: least-squares distance of G(nu) to the pure-gauge space
      d(Omega^0) on off-collar cells.  Every observable pairs to zero with
      pure-gauge fields, so a small relative residual bounds every bracket.
    """
    M = nu.complex
    g = green_causal(nu.cochain)
    w = M.dual_volume(1) / M.volume(1) * M.signature(1)
    core2 = np.where(M.margin(2) >= 2)[0]
    worst = 0.0
    gnorm = float(np.linalg.norm(g.values))
    for _ in range(n_probes):
        gamma = np.zeros(M.num(2))
        sel = rng.choice(core2, size=min(40, core2.size), replace=False)
        gamma[sel] = rng.standard_normal(sel.size)
        beta = codifferential_matrix(M, 2) @ gamma
        val = abs(float(np.dot(beta, w * g.values)))
        scale = max(float(np.linalg.norm(beta)) * gnorm, 1e-300)
        worst = max(worst, val / scale)
    D = d_matrix(M, 0)
    off = np.where(M.margin(1) >= 1)[0]
    fit = lsqr(D[off, :], g.values[off], atol=1e-13, btol=1e-13, iter_lim=50000)
    resid = fit[3] / max(np.linalg.norm(g.values[off]), 1e-300)
    return {
        "probe_bracket_max": worst,
        "n_probes": int(n_probes),
        "gauge_fit_residual": float(resid),
        "gauge_fit_iterations": int(fit[2]),
    }


def run_gauss(resolutions=((24, 16, 32), (48, 32, 64)), charge: float = 1.75,
              profile: Profile = None, circumference: float = 3.0,
              width: float = 2.0, t_span: float = 2.0, tol: float = 0.02,
              bracket_tol: float = 1e-10, seed: int = 0) -> dict:
    """Monopole pairing (nu, *A_Q) -> charge * mass, with nu bracket-null."""
    f = profile or bump_profile("bump", 1.0, 0.4)
    _check_fits(f, 0.0, width, "radial")
    _check_fits(f, 0.0, t_span, "time")
    mass = f.mass()
    tau_norm = 1.0 / f.mass() if f.name == "bump" else None
    if tau_norm is None:
        raise ValueError("gauss scenario needs an even profile")
    reference = charge * mass
    rng = np.random.default_rng(seed)
    rows, errors = [], []
    cert = None
    for (n_phi, n_y, n_t) in resolutions:
        M = cylinder_spacetime(n_phi, n_y, n_t, circumference, width, t_span)
        tau = bump_profile("bump", f.center, f.width)
        nu, _ = gauss_observable(M, f, tau)
        # rescale so the time profile has unit mass
        nu = Observable(Cochain(M, 1, nu.cochain.values * tau_norm))
        A = gauss_configuration(M, charge)
        value = -nu.evaluate(A)   # signature normalization, see module doc
        err = abs(value - reference) / abs(reference)
        errors.append(err)
        cert = gauss_certificates(nu, rng)
        rows.append({
            "resolution": "%dx%dx%d" % (n_phi, n_y, n_t),
            "value": value,
            "reference": reference,
            "relative_error": err,
            "probe_bracket_max": cert["probe_bracket_max"],
            "gauge_fit_residual": cert["gauge_fit_residual"],
        })
    orders = _observed_orders(errors)
    degenerate = all(r["probe_bracket_max"] <= bracket_tol
                     and r["gauge_fit_residual"] <= 1e-8 for r in rows)
    return {
        "charge": charge,
        "profile": {"name": f.name, "center": f.center, "width": f.width},
        "profile_mass": {"value": mass, "provenance": "oracle"},
        "reference": {"value": reference, "provenance": "formula",
                      "formula": "charge * mass"},
        "table": rows,
        "observed_orders": orders,
        "degenerate_certified": bool(degenerate),
        "passed": bool(errors[-1] <= tol and degenerate),
    }


# ---------------------------------------------------------------------------
# two-puncture scenario: the p = 2 triviality law b2 = b0 - b1


def _cut_form(K: CellComplex, puncture_center, axis: int = 1) -> np.ndarray:
    """Integer 1-cochain with unit holonomy around one puncture.

    Implements a branch cut: value +-1 on edges crossing the ray from the
    puncture center in the +axis direction.  Its coboundary vanishes on
    every kept plaquette, since a plaquette picks up equal and opposite
    crossings unless it sits at the (removed) puncture.
    """
    cx, cy = puncture_center
    vals = np.zeros(K.num(1), dtype=np.int64)
    # the cut is the vertical ray of vertices x = cx, y > cy; the crossing
    # edges are the horizontal edges starting at column cx along the ray
    blk = K.blocks[(1, 0)]
    pos = np.indices(blk.shape)
    m = (pos[0] == cx) & (pos[1] > cy)
    vals[blk.ids[blk.kept]] = np.where(m, 1, 0)[blk.kept]
    return vals


def _check_closed(K: CellComplex, vals) -> float:
    return float(np.abs(d_matrix(K, 1) @ np.asarray(vals, float)).max())


def two_puncture_membership(K: CellComplex, alpha_col: dict) -> bool:
    """Exact test: is the 2-cochain d(beta) for a collar-vanishing beta?"""
    den = _exact.select_columns(_exact.from_scipy(d_matrix(K, 1)),
                                np.where(K.margin(1) >= 1)[0])
    r0 = _exact.batch_rank(den)
    r1 = _exact.batch_rank(den + [alpha_col])
    return r1 == r0


def run_two_puncture(n: int = 12, collar: int = 1, seed: int = 0) -> dict:
    """Degeneracy dim and the b2 = b0 - b1 triviality law, all exact.

    The lattice is a 2D grid with two punctures (three ends).  A 1-cochain
    beta is assembled with prescribed holonomies (b0, b1, b2) around the
    outer end and the two punctures, plus a non-closed compact part; the
    top-form alpha = d(beta) is compactly supported, and the exact
    membership solve alpha = d(beta'), beta' collar-vanishing, must succeed
    precisely when b2 = b0 - b1.
    """
    p1 = (n // 3, n // 2)
    p2 = (2 * n // 3, n // 2)
    K = build_grid([Axis(n, 1.0, collar=collar), Axis(n, 1.0, collar=collar)],
                   punctures=[((p1[0] - 1, p1[0] + 1), (p1[1] - 1, p1[1] + 1)),
                              ((p2[0] - 1, p2[0] + 1), (p2[1] - 1, p2[1] + 1))])
    deg = degeneracy_surface(K, 2)
    A1 = _cut_form(K, p1)
    A2 = _cut_form(K, p2)
    assert _check_closed(K, A1) == 0.0 and _check_closed(K, A2) == 0.0
    # radial cutoff rho: 1 outside a box around both punctures, 0 inside;
    # rho*A1 has holonomy 1 at infinity and 0 at both punctures.
    blk = K.blocks[(1, 0)]
    pos = np.indices(blk.shape)
    lo, hi = 2, n - 2
    inside = (pos[0] >= lo) & (pos[0] < hi) & (pos[1] >= lo) & (pos[1] <= hi)
    rho = np.zeros(K.num(1), dtype=np.int64)
    rho[blk.ids[blk.kept]] = np.where(inside, 0, 1)[blk.kept]
    cutoff_A1 = rho * A1
    # compact non-closed part: a single interior edge
    rng = np.random.default_rng(seed)
    core1 = np.where(K.margin(1) >= 3)[0]
    gamma = np.zeros(K.num(1), dtype=np.int64)
    gamma[rng.choice(core1, size=4, replace=False)] = 1
    D = d_matrix(K, 1)
    cases = []
    for (b0, b1, b2, mu) in [(1, 1, 0, 0), (2, 1, 1, 1), (1, 0, 0, 1),
                             (1, 1, 1, 0), (0, 1, -1, 1), (3, 1, 1, 0)]:
        beta = b1 * A1 + b2 * A2 + (b0 - b1 - b2) * cutoff_A1 + mu * gamma
        alpha = (D @ beta.astype(float)).astype(np.int64)
        assert np.abs((D @ beta.astype(float)) - alpha).max() == 0.0
        off = K.margin(2) >= 1
        assert np.abs(alpha[~off]).max() == 0
        from fractions import Fraction
        col = {int(i): Fraction(int(v)) for i, v in enumerate(alpha) if v != 0}
        trivial = two_puncture_membership(K, col)
        cases.append({"b0": b0, "b1": b1, "b2": b2,
                      "law_predicts_trivial": bool(b2 == b0 - b1),
                      "membership_solve_trivial": bool(trivial),
                      "agrees": bool(trivial == (b2 == b0 - b1))})
    return {
        "grid": "%dx%d, two 2x2 punctures, collar %d" % (n, n, collar),
        "degeneracy_dim": int(deg.dim),
        "degeneracy_expected": 1,
        "cases": cases,
        "passed": bool(deg.dim == 1 and all(c["agrees"] for c in cases)),
    }


# ---------------------------------------------------------------------------
# center scenario: radical = degeneracy = quantum center


def run_center(n_phi: int = 8, n_y: int = 6, n_t: int = 10, workers: int = 1) -> dict:
    base = build_grid([Axis(n_phi, 1.0, periodic=True), Axis(n_y, 1.0, collar=1)])
    M = spacetime(base, n_t, 0.5, 2)
    deg = degeneracy_spacetime(M, 1)
    basis = canonical_basis(M, 1)
    pi = bracket_matrix(basis.observables(), workers=workers)
    centers = center_basis(StarAlgebra(basis, pi.matrix))
    dims = {"degeneracy_dim": int(deg.dim),
            "radical_dim": int(pi.radical_dim),
            "quantum_center_rank": len(centers) - 1}
    return {
        "geometry": "circle(%d) x interval(%d) x time(%d)" % (n_phi, n_y, n_t),
        **dims,
        "canonical_basis_dim": basis.dim,
        "passed": bool(len(set(dims.values())) == 1),
    }


# ---------------------------------------------------------------------------
# embed scenario: morphism kernels and the center-quotient obstruction


def _embed_branches():
    from .covariance import MeshEmbedding
    src_f = build_grid([Axis(16, 1.0, collar=1), Axis(16, 1.0, collar=1)],
                       punctures=[((7, 9), (7, 9))])
    tgt_f = build_grid([Axis(16, 1.0, collar=1), Axis(16, 1.0, collar=1)])
    filled = MeshEmbedding(spacetime(src_f, 8, 0.5, 2),
                           spacetime(tgt_f, 8, 0.5, 2), (0, 0, 0))
    src_c = build_grid([Axis(8, 1.0, periodic=True), Axis(6, 1.0, collar=1)])
    tgt_c = build_grid([Axis(8, 1.0, periodic=True), Axis(8, 1.0, periodic=True)])
    closed = MeshEmbedding(spacetime(src_c, 10, 0.5, 2),
                           spacetime(tgt_c, 10, 0.5, 2), (0, 0, 1))
    return filled, closed


def run_embed(workers: int = 1) -> dict:
    from .covariance import center_quotient_obstruction, morphism_kernel
    filled, closed = _embed_branches()
    k_fill = morphism_kernel(filled, 1)
    k_closed = morphism_kernel(closed, 1)
    obstruction = center_quotient_obstruction(filled, closed, workers=workers)
    rep = {
        "filled_branch": {"kernel_dim": k_fill.dim, "flux_dim": k_fill.source_dim},
        "closed_branch": {"kernel_dim": k_closed.dim, "flux_dim": k_closed.source_dim},
        "obstruction": {
            "identity_max_commutator": obstruction.identity.max_commutator,
            "filled_triviality_residual": obstruction.filled.trivial_residual,
            "closed_max_commutator": obstruction.closed.max_commutator,
            "closed_pi_norm": obstruction.closed.pi_norm,
            "reproduced": bool(obstruction.reproduced),
        },
        "passed": bool(k_fill.dim == 1 and k_closed.dim == 0
                       and obstruction.reproduced),
    }
    return rep


def run_sc_gauge(n_phi: int = 8, n_y: int = 6) -> dict:
    """Wrong-gauge-equivalence demonstration (surface level, exact ranks).

    Quotienting by unrestricted coboundaries (instead of collar-vanishing
    ones) empties the degeneracy space, but the resulting triviality notion
    is not preserved by push-forward: the radial flux form is trivial on
    the cylinder yet push-forward to a closed surface is not exact at all.
    """
    from .covariance import MeshEmbedding
    from fractions import Fraction
    K = build_grid([Axis(n_phi, 1.0, periodic=True), Axis(n_y, 1.0, collar=1)])
    T = build_grid([Axis(n_phi, 1.0, periodic=True), Axis(n_y + 2, 1.0, periodic=True)])
    psi = MeshEmbedding(K, T, (0, 1))
    # radial flux 1-cochain: unit values on radial edges of two interior rings
    blk = K.blocks[(0, 1)]
    pos = np.indices(blk.shape)
    sel = (pos[1] == 2) | (pos[1] == 3)
    alpha = np.zeros(K.num(1), dtype=np.int64)
    alpha[blk.ids[blk.kept]] = np.where(sel, 1, 0)[blk.kept]
    assert _check_closed(K, alpha) == 0.0
    col = {int(i): Fraction(int(v)) for i, v in enumerate(alpha) if v != 0}

    def exact_in_span(T_, col_, restrict_margin):
        cols = _exact.from_scipy(d_matrix(T_, 0))
        if restrict_margin:
            cols = _exact.select_columns(cols, np.where(T_.margin(0) >= 1)[0])
        return _exact.batch_rank(cols + [col_]) == _exact.batch_rank(cols)

    trivial_std = exact_in_span(K, col, True)      # compact-support quotient
    trivial_sc = exact_in_span(K, col, False)      # unrestricted quotient
    pushed = psi.push_exact(col, 1)
    pushed_trivial_sc = exact_in_span(T, pushed, False)
    # degeneracy dims: numerator = collar-vanishing coboundaries, denominator
    # = coboundaries of collar-vanishing (standard) vs arbitrary (sc) functions
    Dfull = _exact.from_scipy(d_matrix(K, 0))
    den_std = _exact.select_columns(Dfull, np.where(K.margin(0) >= 1)[0])
    collar_rows = set(np.where(K.margin(1) < 1)[0].tolist())
    constraint = [{r: v for r, v in c.items() if r in collar_rows} for c in Dfull]
    deg_std = _exact.stacked_quotient_dim(den_std, Dfull, constraint)
    assert deg_std == degeneracy_surface(K, 1).dim
    deg_sc = _exact.stacked_quotient_dim(Dfull, Dfull, constraint)
    return {
        "standard_trivial": bool(trivial_std),
        "sc_trivial": bool(trivial_sc),
        "pushforward_sc_trivial": bool(pushed_trivial_sc),
        "standard_degeneracy_dim": int(deg_std),
        "sc_degeneracy_dim": int(deg_sc),
        "pushforward_triviality_preserved": bool(pushed_trivial_sc or not trivial_sc),
        "passed": bool((not trivial_std) and trivial_sc and (not pushed_trivial_sc)
                       and deg_sc == 0 and deg_std == 1),
    }


# ---------------------------------------------------------------------------
# verify scenario: cross-module invariant suite


def _identity_geometries():
    return {
        "interval_1+1": spacetime(build_grid([Axis(16, 1.0, collar=2)]), 16, 0.5, 2),
        "circle_1+1": spacetime(build_grid([Axis(12, 1.0, periodic=True)]), 12, 0.5, 2),
        "cylinder_2+1": spacetime(build_grid([Axis(8, 1.0, periodic=True),
                                              Axis(6, 1.0, collar=1)]), 10, 0.5, 2),
        "punctured_2+1": spacetime(build_grid([Axis(8, 1.0, collar=1),
                                               Axis(8, 1.0, collar=1)],
                                              punctures=[((3, 5), (3, 5))]), 8, 0.5, 2),
        "box_3+1": spacetime(build_grid([Axis(5, 1.0, collar=1), Axis(5, 1.0, collar=1),
                                         Axis(5, 1.0, collar=1)]), 10, 0.4, 2),
    }


def verify_identities(seed: int = 0) -> dict:
    """Exact discrete identity suite over randomized cochains, >= 5 geometries."""
    from .calculus import HodgeWeights, box_matrix
    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ["dd", "delta_delta", "double_star", "pair_symmetry",
                              "summation_by_parts", "box_d_commute",
                              "box_delta_commute", "green_d_commute",
                              "green_delta_commute"]}
    for name, M in _identity_geometries().items():
        n = M.n
        hw = HodgeWeights(M)
        for p in range(n + 1):
            a = Cochain(M, p, rng.standard_normal(M.num(p)))
            b = Cochain(M, p, rng.standard_normal(M.num(p)))
            s = float(np.abs(a.values).max())
            if p + 2 <= n:
                dd = d_matrix(M, p + 1) @ (d_matrix(M, p) @ a.values)
                worst["dd"] = max(worst["dd"], np.abs(dd).max() / s)
            if p >= 2:
                cc = codifferential_matrix(M, p - 1) @ (codifferential_matrix(M, p) @ a.values)
                worst["delta_delta"] = max(worst["delta_delta"], np.abs(cc).max() / s)
            sign = hw.double_star_sign(p)
            expect = (-1.0) ** (n - 1 + p * (n - p)) * np.ones_like(sign)
            worst["double_star"] = max(worst["double_star"], np.abs(sign - expect).max())
            worst["pair_symmetry"] = max(worst["pair_symmetry"],
                                         abs(pair(a, b) - pair(b, a)) / max(abs(pair(a, b)), 1e-30))
            if p < n:
                c = Cochain(M, p + 1, rng.standard_normal(M.num(p + 1)))
                lhs = pair(Cochain(M, p, codifferential_matrix(M, p + 1) @ c.values), a)
                rhs = -pair(c, Cochain(M, p + 1, d_matrix(M, p) @ a.values))
                worst["summation_by_parts"] = max(worst["summation_by_parts"],
                                                  abs(lhs - rhs) / max(abs(lhs), 1e-30))
                bd = box_matrix(M, p + 1) @ (d_matrix(M, p) @ a.values)
                db = d_matrix(M, p) @ (box_matrix(M, p) @ a.values)
                worst["box_d_commute"] = max(worst["box_d_commute"],
                                             np.abs(bd - db).max() / max(np.abs(bd).max(), 1e-30))
            if p >= 1:
                bc = box_matrix(M, p - 1) @ (codifferential_matrix(M, p) @ a.values)
                cb = codifferential_matrix(M, p) @ (box_matrix(M, p) @ a.values)
                worst["box_delta_commute"] = max(worst["box_delta_commute"],
                                                 np.abs(bc - cb).max() / max(np.abs(bc).max(), 1e-30))
        # Green commutation on compactly supported sources, bulk cells
        for p in [1, min(2, n - 1)]:
            src = np.zeros(M.num(p))
            ok = np.where((M.margin(p) >= 2) & (M.time_margin(p) >= 3))[0]
            assert ok.size > 0
            src[ok] = rng.standard_normal(ok.size)
            a = Cochain(M, p, src)
            g = green_causal(a)
            if p < n:
                dg = d_matrix(M, p) @ g.values
                gd = green_causal(Cochain(M, p + 1, d_matrix(M, p) @ src)).values
                bulk = M.margin(p + 1) >= 1
                worst["green_d_commute"] = max(worst["green_d_commute"],
                                               np.abs(dg - gd)[bulk].max() / max(np.abs(gd).max(), 1e-30))
            cg = codifferential_matrix(M, p) @ g.values
            gc = green_causal(Cochain(M, p - 1, codifferential_matrix(M, p) @ src)).values
            bulk = M.margin(p - 1) >= 1
            worst["green_delta_commute"] = max(worst["green_delta_commute"],
                                               np.abs(cg - gc)[bulk].max() / max(np.abs(gc).max(), 1e-30))
    return {"residuals": worst,
            "geometries": len(_identity_geometries()),
            "passed": bool(all(v <= 1e-12 for v in worst.values()))}


def run_verify(seed: int = 0, workers: int = 1) -> dict:
    """Aggregate invariant summary across modules."""
    ident = verify_identities(seed)
    deg = {}
    for name, K, p, want in [
        ("interval", build_grid([Axis(12, 1.0, collar=1)]), 1, 1),
        ("cylinder", build_grid([Axis(8, 1.0, periodic=True), Axis(6, 1.0, collar=1)]), 1, 1),
        ("circle", build_grid([Axis(10, 1.0, periodic=True)]), 1, 0),
    ]:
        deg[name] = {"dim": int(degeneracy_surface(K, p).dim), "expected": want}
    center = run_center(workers=workers)
    report = {
        "identities": ident,
        "degeneracy": deg,
        "center": center,
        "passed": bool(ident["passed"]
                       and all(v["dim"] == v["expected"] for v in deg.values())
                       and center["passed"]),
    }
    return report


# ---------------------------------------------------------------------------
# configuration and dispatch


@dataclass
class ScenarioConfig:
    scenario: str
    p: int = 1
    flux: float = 2.5
    charge: float = 1.75
    profile_name: str = "bump"
    profile_center: float = 1.0
    profile_width: float = 0.4
    resolutions: list = field(default_factory=list)
    dt: float = 0.0
    collar: int = 2
    tolerance: float = 0.02
    out_dir: str = "."
    seed: int = 0
    workers: int = 1
    gauge: str = "standard"
    with_3d: bool = True

    _FIELDS = {
        "scenario": str, "p": int, "flux": (int, float), "charge": (int, float),
        "profile_name": str, "profile_center": (int, float),
        "profile_width": (int, float), "resolutions": list, "dt": (int, float),
        "collar": int, "tolerance": (int, float), "out_dir": str, "seed": int,
        "workers": int, "gauge": str, "with_3d": bool,
    }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ValueError("config root must be a JSON object")
        if "scenario" not in d:
            raise ValueError("config field 'scenario': missing (one of %s)"
                             % ", ".join(SCENARIO_NAMES))
        kwargs = {}
        for key, val in d.items():
            if key not in cls._FIELDS:
                raise ValueError("config field '%s': unknown field" % key)
            want = cls._FIELDS[key]
            if not isinstance(val, want) or isinstance(val, bool) and want is not bool:
                names = "/".join(t.__name__ for t in
                                 (want if isinstance(want, tuple) else (want,)))
                raise ValueError("config field '%s': expected %s, got %r"
                                 % (key, names, val))
            kwargs[key] = val
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "ScenarioConfig":
        with open(path) as fh:
            text = fh.read()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError("config parse error at line %d column %d: %s"
                             % (exc.lineno, exc.colno, exc.msg)) from None
        return cls.from_dict(d)

    def validate(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ValueError("config field 'scenario': %r is not one of %s"
                             % (self.scenario, ", ".join(SCENARIO_NAMES)))
        if self.gauge not in ("standard", "sc"):
            raise ValueError("config field 'gauge': must be 'standard' or 'sc'")
        if self.profile_width <= 0:
            raise ValueError("config field 'profile_width': must be positive")
        for r in self.resolutions:
            if (not isinstance(r, list)) or len(r) != 3 \
                    or not all(isinstance(v, int) and v > 0 for v in r):
                raise ValueError("config field 'resolutions': entries must be "
                                 "[n_angle, n_radial, n_time] positive integers")
        if self.scenario == "converge" and self.resolutions:
            ns = [tuple(r) for r in self.resolutions]
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ValueError("config field 'resolutions': must be strictly "
                                 "increasing in converge mode")

    def profile(self) -> Profile:
        return bump_profile(self.profile_name, self.profile_center, self.profile_width)


def run(config: ScenarioConfig) -> dict:
    """Execute the named scenario and write its reports.

    Returns the JSON report (also written to disk); report["passed"] drives
    the process exit code.
    """
    name = config.scenario
    res = [tuple(r) for r in config.resolutions] or None
    if config.gauge == "sc":
        report = run_sc_gauge()
        name_out = "sc-gauge"
    elif name == "ab":
        report = run_ab(resolutions=res or ((24, 16, 32), (48, 32, 64), (96, 64, 128)),
                        flux=config.flux, profile=config.profile(),
                        with_3d=config.with_3d, tol=config.tolerance)
        name_out = name
    elif name == "converge":
        report = run_ab(resolutions=res or ((24, 16, 32), (48, 32, 64), (96, 64, 128)),
                        flux=config.flux, profile=config.profile(),
                        with_3d=False, with_odd=False, tol=config.tolerance)
        name_out = name
    elif name == "gauss":
        report = run_gauss(resolutions=res or ((24, 16, 32), (48, 32, 64)),
                           charge=config.charge, profile=config.profile(),
                           tol=config.tolerance, seed=config.seed)
        name_out = name
    elif name == "two-puncture":
        report = run_two_puncture(seed=config.seed)
        name_out = name
    elif name == "center":
        report = run_center(workers=config.workers)
        name_out = name
    elif name == "embed":
        report = run_embed(workers=config.workers)
        name_out = name
    elif name == "verify":
        report = run_verify(seed=config.seed, workers=config.workers)
        name_out = name
    else:  # pragma: no cover - guarded by validate()
        raise ValueError("unknown scenario %r" % name)
    report = {"schema_version": SCHEMA_VERSION, "scenario": name_out,
              "seed": config.seed, **report}
    write_report(config.out_dir, name_out, report)
    return report


# ---------------------------------------------------------------------------
# persistence


def _validate_report(report: dict):
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("report schema version mismatch")
    for key in ("scenario", "passed", "seed"):
        if key not in report:
            raise ValueError("report is missing required key %r" % key)
    json.dumps(report)   # must be serializable


def write_report(out_dir: str, name: str, report: dict) -> str:
    _validate_report(report)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "%s.json" % name)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = report.get("table")
    if table:
        cpath = os.path.join(out_dir, "%s.csv" % name)
        cols = ["resolution", "value", "reference", "relative_error", "observed_order"]
        with open(cpath, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for row in table:
                writer.writerow([row.get(c, "") for c in cols])
    return path
