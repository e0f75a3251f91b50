"""Exact lattice cohomology and degeneracy spaces.

All dimensions here are computed by exact rational elimination on the integer
incidence matrices (Fraction arithmetic, no thresholds).  Floating point
enters only as an optional SVD cross-check of the rank decisions.

Support conventions (margins are graph distances to COLLAR, see lattice.py):
"compactly supported" cochains have margin >= 1 (zero on COLLAR).  Images
under d or delta of such cochains may spill back onto the collar; where a
quotient needs its numerator collar-free, that is imposed as an explicit
row constraint rather than by deepening the support margin, so dimensions
stay stable on small lattices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _exact
from .calculus import codifferential_columns_exact, d_columns_exact
from .lattice import CellComplex, SpacetimeLattice

FLOAT_CHECK_LIMIT = 1500
SVD_REL_TOL = 1e-8


@dataclass
class CohomologyReport:
    support: str
    dims: list
    ranks: list
    cell_counts: list
    float_checked: bool
    float_agrees: bool


@dataclass
class DegeneracyBasis:
    degree: int
    dim: int
    representatives: list = field(default_factory=list)  # cochain value arrays


def _restricted_d_columns(K: CellComplex, p: int, keep_lo, keep_hi):
    cols = d_columns_exact(K, p)
    out = []
    for j in np.where(keep_lo)[0]:
        out.append({r: v for r, v in cols[j].items() if keep_hi[r]})
    return out


def _float_rank(cols, n_rows) -> int:
    dense = _exact.dense_from_columns(cols, n_rows)
    if min(dense.shape) == 0:
        return 0
    s = np.linalg.svd(dense, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > SVD_REL_TOL * s[0]))


def cohomology(K: CellComplex, support: str = "absolute",
               float_check: bool = True) -> CohomologyReport:
    """Betti numbers of the complex (absolute) or of the pair (K, COLLAR)
    (compact, i.e. collar-vanishing cochains)."""
    if support not in ("absolute", "compact"):
        raise ValueError("support must be 'absolute' or 'compact'")
    n = K.n
    keep = [
        np.ones(K.num(p), dtype=bool) if support == "absolute" else K.margin(p) >= 1
        for p in range(n + 1)
    ]
    counts = [int(keep[p].sum()) for p in range(n + 1)]
    ranks = []
    agrees = True
    checked = True
    for p in range(n):
        cols = _restricted_d_columns(K, p, keep[p], keep[p + 1])
        r = _exact.rank_of(cols)
        ranks.append(r)
        if max(counts[p], counts[p + 1]) <= FLOAT_CHECK_LIMIT:
            if _float_rank(cols, K.num(p + 1)) != r:
                agrees = False
        else:
            checked = False
    dims = []
    for p in range(n + 1):
        r_up = ranks[p] if p < n else 0
        r_dn = ranks[p - 1] if p > 0 else 0
        dims.append(counts[p] - r_up - r_dn)
    return CohomologyReport(support, dims, ranks, counts, checked, agrees)


def poincare_check(K: CellComplex) -> dict:
    """Compact-support/absolute duality: dim H^p_0 == dim H^(n-p)."""
    absolute = cohomology(K, "absolute")
    compact = cohomology(K, "compact")
    n = K.n
    ok = all(compact.dims[p] == absolute.dims[n - p] for p in range(n + 1))
    return {
        "absolute": absolute.dims,
        "compact": compact.dims,
        "dual_pairs": [(compact.dims[p], absolute.dims[n - p]) for p in range(n + 1)],
        "ok": ok,
    }


def degeneracy_surface(K: CellComplex, p: int,
                       representatives: bool = True) -> DegeneracyBasis:
    """dim of (collar-vanishing exact p-cochains) / d(collar-vanishing).

    Numerator: {d beta : (d beta)|_COLLAR = 0}; denominator: d beta for
    collar-vanishing beta.  Dimensions are exact integers.
    """
    if p < 1:
        return DegeneracyBasis(p, 0)
    A = d_columns_exact(K, p - 1)
    collar_hi = K.margin(p) == 0
    keep_lo = K.margin(p - 1) >= 1
    den = [{r: v for r, v in A[j].items()} for j in np.where(keep_lo)[0]]
    constraint = _exact.restrict_rows(A, collar_hi)
    dim = _exact.stacked_quotient_dim(den, A, constraint)
    reps = []
    if representatives and dim > 0:
        kern = _exact.nullspace(constraint)
        cand = _exact.compose(A, kern)
        e = _exact.Eliminator()
        for c in den:
            e.add(c)
        for c in cand:
            before = e.rank
            if e.add(c):
                vec = np.zeros(K.num(p))
                for r, v in c.items():
                    vec[r] = float(v)
                reps.append(vec)
            if e.rank - before and len(reps) == dim:
                break
    return DegeneracyBasis(p, dim, reps)


def degeneracy_spacetime(M: SpacetimeLattice, p: int) -> DegeneracyBasis:
    """dim of delta(collar-free cochains in d Omega^p_tc) / delta d Omega^p_0.

    Omega_tc: vanishing on the temporal collar only; Omega_0: vanishing on
    the full collar.  Must agree with the surface computation on the base.
    """
    Dtc_all = d_columns_exact(M, p)
    tc_cols = np.where(M.time_margin(p) >= 1)[0]
    Dtc = _exact.select_columns(Dtc_all, tc_cols)
    collar = M.margin(p + 1) == 0
    constraint = _exact.restrict_rows(Dtc, collar)
    delta_cols = codifferential_columns_exact(M, p + 1)
    delta_Dtc = _exact.compose(delta_cols, Dtc)
    zero_cols = np.where(M.margin(p) >= 1)[0]
    den = _exact.compose(delta_cols, _exact.select_columns(Dtc_all, zero_cols))
    dim = _exact.stacked_quotient_dim(den, delta_Dtc, constraint)
    return DegeneracyBasis(p, dim)
