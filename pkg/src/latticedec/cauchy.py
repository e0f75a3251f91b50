"""Causal solvers and the Maxwell Cauchy problem on spacetime lattices.

The wave operator `box` couples half-integer time levels l and l+2 through a
per-cell diagonal coefficient, so `box A = s` is solved by literal forward
(or backward) substitution in time: given two consecutive known levels, the
row equations at level l determine level l+2 exactly.  No iterative solver is
involved; the only error is float roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .calculus import (
    Cochain,
    box_matrix,
    codifferential_matrix,
    d_matrix,
    pair,
)
from .lattice import SpacetimeLattice

# G = GREEN_SIGN * (retarded - advanced).  The convention is fixed by the
# causal-perturbation picture: displacing a solution by the effect of a
# compactly supported perturbation alpha gives the vector field -G alpha,
# with G = advanced - retarded, and the bracket is pair(alpha, G beta).
GREEN_SIGN = -1.0  # causal propagator convention: G = advanced - retarded


@dataclass
class Current:
    """A conserved source: (p)-cochain j with delta j = 0 on the bulk."""

    cochain: Cochain
    tol: float = 1e-12

    def __post_init__(self):
        M = self.cochain.complex
        p = self.cochain.degree
        if p >= 1:
            r = codifferential_matrix(M, p) @ self.cochain.values
            bulk = M.margin(p - 1) >= 1
            worst = float(np.abs(r[bulk]).max()) if bulk.any() else 0.0
            if worst > self.tol:
                raise ValueError("current is not conserved on the bulk: %.3g" % worst)


@dataclass
class InitialData:
    """Temporal-gauge Cauchy data on slice t0: (a, E), with phi = omega = 0."""

    a: np.ndarray
    E: np.ndarray
    t0: int


@dataclass
class _MarchMaps:
    lev: np.ndarray
    max_level: int
    rows_at: dict
    adv_col: np.ndarray
    adv_coef: np.ndarray
    ret_col: np.ndarray
    ret_coef: np.ndarray


def _march_maps(M: SpacetimeLattice, p: int) -> _MarchMaps:
    key = ("marchmaps", p)
    if key in M._cache:
        return M._cache[key]
    L = box_matrix(M, p).tocoo()
    lev = M.time_level(p)
    n = M.num(p)
    max_level = int(lev.max()) if n else 0

    def targets(shift):
        col = np.full(n, -1, dtype=np.int64)
        coef = np.zeros(n)
        mask = lev[L.col] == lev[L.row] + shift
        cnt = np.bincount(L.row[mask], minlength=n)
        if cnt.max(initial=0) > 1:
            raise RuntimeError("time coupling of box is not diagonal")
        col[L.row[mask]] = L.col[mask]
        coef[L.row[mask]] = L.data[mask]
        if np.any((col >= 0) & (coef == 0.0)):
            raise RuntimeError("vanishing marching coefficient")
        return col, coef

    adv_col, adv_coef = targets(+2)
    ret_col, ret_coef = targets(-2)
    rows_at = {}
    for l in range(max_level + 1):
        idx = np.where(lev == l)[0]
        if len(idx):
            rows_at[l] = idx
    mm = _MarchMaps(lev, max_level, rows_at, adv_col, adv_coef, ret_col, ret_coef)
    M._cache[key] = mm
    return mm


def _march(M: SpacetimeLattice, p: int, rhs: np.ndarray, A: np.ndarray,
           known_lo: int, known_hi: int, forward: bool = True, backward: bool = True):
    """Propagate A from the known levels [known_lo, known_hi] across the lattice."""
    L = box_matrix(M, p)
    mm = _march_maps(M, p)
    if forward:
        for l in range(known_hi - 1, mm.max_level - 1):
            rows = mm.rows_at.get(l)
            if rows is None:
                continue
            rows = rows[mm.adv_col[rows] >= 0]
            if not len(rows):
                continue
            r = rhs[rows] - (L[rows] @ A)
            A[mm.adv_col[rows]] += r / mm.adv_coef[rows]
    if backward:
        for l in range(known_lo + 1, 1, -1):
            rows = mm.rows_at.get(l)
            if rows is None:
                continue
            rows = rows[mm.ret_col[rows] >= 0]
            if not len(rows):
                continue
            r = rhs[rows] - (L[rows] @ A)
            A[mm.ret_col[rows]] += r / mm.ret_coef[rows]
    return A


def solve_retarded(source: Cochain) -> Cochain:
    """Solution of box A = source vanishing before the source's past."""
    M = source.complex
    p = source.degree
    A = np.zeros(M.num(p))
    _march(M, p, source.values, A, 0, 1, forward=True, backward=False)
    return Cochain(M, p, A)


def solve_advanced(source: Cochain) -> Cochain:
    M = source.complex
    p = source.degree
    mm = _march_maps(M, p)
    A = np.zeros(M.num(p))
    _march(M, p, source.values, A, mm.max_level - 1, mm.max_level,
           forward=False, backward=True)
    return Cochain(M, p, A)


def green_causal(source: Cochain) -> Cochain:
    """Causal propagator G = advanced - retarded (GREEN_SIGN fixes the
    orientation so that the Peierls bracket matches the Cauchy-slice form)."""
    r = solve_retarded(source)
    a = solve_advanced(source)
    return Cochain(source.complex, source.degree, GREEN_SIGN * (r.values - a.values))


def wave_residual(A: Cochain, source: Cochain, margin: int = 1) -> float:
    """Max |box A - source| over cells with time margin >= `margin`."""
    M = A.complex
    p = A.degree
    r = box_matrix(M, p) @ A.values - source.values
    keep = M.time_margin(p) >= margin
    return float(np.abs(r[keep]).max()) if keep.any() else 0.0


# ---------------------------------------------------------------------------
# slice data extraction / injection


def slice_a(A: Cochain, t: int) -> np.ndarray:
    M = A.complex
    return A.values[M.slice_ids(A.degree, 0)[t]]


def slice_E(A: Cochain, t: int) -> np.ndarray:
    """E(s) = (dA)([t,t+1] x s) / dt: the forward electric field on slice t."""
    M = A.complex
    p = A.degree
    F = d_matrix(M, p) @ A.values
    return F[M.slice_ids(p + 1, 1)[t]] / M.dt


def slice_phi(A: Cochain, t: int) -> np.ndarray:
    """phi(f) = A([t,t+1] x f) / dt: the scalar-potential part of the slice data."""
    M = A.complex
    return A.values[M.slice_ids(A.degree, 1)[t]] / M.dt


def constraint_residual(M: SpacetimeLattice, p: int, data: InitialData,
                        current: Cochain | None = None) -> float:
    """Max norm of delta_Sigma E - rho over bulk (p-1)-cells of the base.

    rho is the normal component of the current on the initial slice, read off
    the q=1 (time-extruded) p-cells just above it: rho(f) = j([t0,t0+1] x f)/dt.
    The sign makes the identity exact for every solution of box A = j with
    vanishing delta A (checked against manufactured solutions in the tests).
    """
    base = M.base
    dS = codifferential_matrix(base, p)
    lhs = dS @ data.E
    if current is not None:
        rho = current.values[M.slice_ids(p, 1)[data.t0]] / M.dt
        lhs = lhs - rho
    bulk = base.margin(p - 1) >= 1
    return float(np.abs(lhs[bulk]).max()) if bulk.any() else 0.0


def maxwell_solve(M: SpacetimeLattice, p: int, data: InitialData,
                  current: Cochain | None = None) -> Cochain:
    """Solve box A = j from temporal-gauge Cauchy data (a, E, phi=0, omega=0).

    The slice values of A are a; the next slice is reconstructed from E via
    E = (a_{t+1} - a_t)/dt (phi = 0 on the first half-step); the half-step
    below the slice is fixed by requiring (delta A) = 0 on the initial slice,
    which encodes omega = -phi_dot - delta_Sigma a = 0.  The solution is then
    marched both forward and backward.  If the constraint delta_Sigma E = rho
    holds, delta A vanishes on the bulk and A solves delta d A = j there.
    """
    if p < 1:
        raise ValueError("Maxwell data needs p >= 1")
    t0 = data.t0
    j = current.values if current is not None else np.zeros(M.num(p))
    A = np.zeros(M.num(p))
    S0 = M.slice_ids(p, 0)
    A[S0[t0]] = data.a

    # forward half step: rows are the q=1 (p+1)-cells spanning [t0, t0+1]
    D = d_matrix(M, p)
    rows = M.slice_ids(p + 1, 1)[t0]
    cols = S0[t0 + 1]
    c1 = np.asarray(D[rows, cols]).ravel()
    r = M.dt * data.E - (D[rows] @ A)
    A[cols] = r / c1

    # backward half step: zero delta A on the slice fixes the q=1 cells below
    delta = codifferential_matrix(M, p)
    rows = M.slice_ids(p - 1, 0)[t0]
    cols = M.slice_ids(p, 1)[t0 - 1]
    cdiag = np.asarray(delta[rows, cols]).ravel()
    r = -(delta[rows] @ A)
    A[cols] = r / cdiag

    _march(M, p, j, A, 2 * t0 - 1, 2 * t0 + 2)
    return Cochain(M, p, A)


# ---------------------------------------------------------------------------
# gauge fixing


def divergence_residual(A: Cochain, margin: int = 1) -> float:
    M = A.complex
    p = A.degree
    r = codifferential_matrix(M, p) @ A.values
    keep = M.margin(p - 1) >= margin
    return float(np.abs(r[keep]).max()) if keep.any() else 0.0


def lorenz_fix(A: Cochain, dense_limit: int = 6000) -> Cochain:
    """Gauge-equivalent A' = A + d chi with delta A' = 0 on the bulk.

    chi solves the bulk rows of (delta d) chi = -delta A in the least-squares
    sense; on lattices where an exact Lorenz gauge exists the residual is at
    roundoff level.  dA' = dA holds identically.
    """
    M = A.complex
    p = A.degree
    if p < 1:
        raise ValueError("nothing to fix for 0-cochains")
    n_chi = M.num(p - 1)
    if n_chi > dense_limit:
        raise ValueError("lattice too large for the dense gauge solve")
    dd = codifferential_matrix(M, p) @ d_matrix(M, p - 1)
    bulk = M.margin(p - 1) >= 1
    rhs = -(codifferential_matrix(M, p) @ A.values)[bulk]
    mat = dd.toarray()[bulk]
    chi, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    return Cochain(M, p, A.values + d_matrix(M, p - 1) @ chi)


def temporal_fix(A: Cochain, t0: int) -> Cochain:
    """Gauge-equivalent A' = A + d chi with phi' = 0 across [t0, t0+1].

    chi has zero slice value at t0 (so a' = a there) and box chi = -delta A;
    E is preserved exactly because d d = 0.  For Lorenz-gauge input, delta A'
    stays zero on the bulk.
    """
    M = A.complex
    p = A.degree
    if p < 1:
        raise ValueError("temporal gauge needs p >= 1")
    chi = np.zeros(M.num(p - 1))
    u = A.values[M.slice_ids(p, 1)[t0]]

    D = d_matrix(M, p - 1)
    rows = M.slice_ids(p, 1)[t0]
    cols = M.slice_ids(p - 1, 0)[t0 + 1]
    c1 = np.asarray(D[rows, cols]).ravel()
    r = -u - (D[rows] @ chi)
    chi[cols] = r / c1

    known_lo, known_hi = 2 * t0, 2 * t0 + 2
    if p >= 2:
        # zero delta chi on the slice to keep delta A' clean, mirroring
        # the Maxwell initialization
        delta = codifferential_matrix(M, p - 1)
        rows = M.slice_ids(p - 2, 0)[t0]
        cols = M.slice_ids(p - 1, 1)[t0 - 1]
        cdiag = np.asarray(delta[rows, cols]).ravel()
        chi[cols] = -(delta[rows] @ chi) / cdiag
        known_lo = 2 * t0 - 1

    src = -(codifferential_matrix(M, p) @ A.values)
    _march(M, p - 1, src, chi, known_lo, known_hi)
    return Cochain(M, p, A.values + d_matrix(M, p - 1) @ chi)


# ---------------------------------------------------------------------------
# holonomy


def _edge_endpoints(K, orient=True):
    key = ("edgeends",)
    if key in K._cache:
        return K._cache[key]
    rows, cols, vals = K.boundary_int(1)
    head = np.full(K.num(1), -1, dtype=np.int64)
    tail = np.full(K.num(1), -1, dtype=np.int64)
    for r, c, v in zip(rows, cols, vals):
        if v > 0:
            head[c] = r
        else:
            tail[c] = r
    K._cache[key] = (tail, head)
    return K._cache[key]


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def holonomy_winding(K, theta: np.ndarray, loop) -> int:
    """Winding number of the phase field e^{i theta} around a vertex loop.

    `loop` is a closed sequence of vertex ids (first == last not required).
    Returns the integer (1/2pi) sum of principal-value phase differences.
    """
    loop = list(loop)
    if loop[0] != loop[-1]:
        loop = loop + [loop[0]]
    total = 0.0
    for v, w in zip(loop[:-1], loop[1:]):
        total += _wrap(theta[w] - theta[v])
    winding = total / (2 * np.pi)
    k = int(round(winding))
    if abs(winding - k) > 1e-9:
        raise ValueError("phase differences do not close to an integer winding")
    return k


def phase_is_exact(K, theta: np.ndarray, tol: float = 1e-9):
    """Decide whether e^{i theta} = e^{i chi} for a single-valued chi.

    True exactly when the principal-value phase cochain is an exact
    1-cochain, i.e. all plaquette and homology-loop windings vanish.
    Returns (decision, max plaquette winding residual).
    """
    tail, head = _edge_endpoints(K)
    eta = _wrap(theta[head] - theta[tail])
    # plaquette windings must vanish ...
    if K.n >= 2:
        w2 = (d_matrix(K, 1) @ eta) / (2 * np.pi)
        if len(w2) and np.abs(w2).max() > 0.5 - 1e-9:
            return False, float(np.abs(np.round(w2)).max())
    # ... and eta must be globally exact (kills homology windings)
    D0 = d_matrix(K, 0)
    chi = sp.linalg.lsqr(D0, eta, atol=1e-13, btol=1e-13, iter_lim=20000)[0]
    res = float(np.abs(D0 @ chi - eta).max())
    return res <= max(tol, 1e-7), res
