"""Sparse exact linear algebra over the rationals.

Matrices are lists of columns, each column a dict {row: Fraction}.  The
eliminator keeps an echelon set of pivot columns; reducing a new column
against pivots in creation order terminates because a pivot column can only
contain pivot rows created after it.  Everything is exact; there are no
tolerances anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class Eliminator:
    def __init__(self):
        # pivot row -> (creation order, normalized column)
        self.pivots = {}
        self.rank = 0

    def reduce(self, col: dict) -> dict:
        col = {r: Fraction(v) for r, v in col.items() if v}
        while True:
            hit = None
            best = None
            for r in col:
                p = self.pivots.get(r)
                if p is not None and (best is None or p[0] < best):
                    best = p[0]
                    hit = r
            if hit is None:
                return col
            f = col[hit]
            for rr, vv in self.pivots[hit][1].items():
                nv = col.get(rr, 0) - f * vv
                if nv:
                    col[rr] = nv
                else:
                    col.pop(rr, None)

    def add(self, col: dict) -> bool:
        """Insert a column; returns True if it increased the rank."""
        red = self.reduce(col)
        if not red:
            return False
        # pivot on the entry of smallest magnitude denominator/numerator mix;
        # any choice is exact, smallest support row index keeps this stable
        r0 = min(red)
        inv = 1 / red[r0]
        self.pivots[r0] = (self.rank, {r: v * inv for r, v in red.items()})
        self.rank += 1
        return True

    def contains(self, col: dict) -> bool:
        return not self.reduce(col)


def _int_columns(cols):
    """Clear denominators per column (exact; spans are unchanged)."""
    out = []
    for c in cols:
        if not c:
            out.append({})
            continue
        l = 1
        for v in c.values():
            f = Fraction(v)
            l = l * f.denominator // gcd(l, f.denominator)
        col = {r: int(Fraction(v) * l) for r, v in c.items()}
        g = 0
        for v in col.values():
            g = gcd(g, v)
        if g > 1:
            col = {r: v // g for r, v in col.items()}
        out.append(col)
    return out


def batch_rank(cols) -> int:
    """Exact rank by fraction-free sparse elimination with Markowitz-style
    pivoting (pivot in the shortest column, on its least-populated row)."""
    cols = _int_columns(cols)
    rowocc = {}
    for j, c in enumerate(cols):
        for r in c:
            rowocc.setdefault(r, set()).add(j)
    active = {j for j, c in enumerate(cols) if c}
    rank = 0
    while active:
        jc = min(active, key=lambda j: len(cols[j]))
        piv = cols[jc]
        r = min(piv, key=lambda rr: len(rowocc[rr]))
        a = piv[r]
        rank += 1
        for j in list(rowocc[r]):
            if j == jc:
                continue
            col = cols[j]
            b = col[r]
            new = {}
            for rr, vv in col.items():
                new[rr] = a * vv
            for rr, vv in piv.items():
                nv = new.get(rr, 0) - b * vv
                if nv:
                    new[rr] = nv
                else:
                    new.pop(rr, None)
            g = 0
            for vv in new.values():
                g = gcd(g, vv)
            if g > 1:
                new = {rr: vv // g for rr, vv in new.items()}
            for rr in col:
                if rr not in new:
                    rowocc[rr].discard(j)
            for rr in new:
                if rr not in col:
                    rowocc.setdefault(rr, set()).add(j)
            cols[j] = new
            if not new:
                active.discard(j)
        for rr in piv:
            rowocc[rr].discard(jc)
        active.discard(jc)
    return rank


def rank_of(cols) -> int:
    return batch_rank(cols)


def nullspace(cols) -> list:
    """Kernel basis of the matrix with the given columns.

    Returns coefficient dicts {column index: Fraction}; the corresponding
    combinations of input columns vanish.
    """
    e = Eliminator()
    out = []
    shift = 10**9  # tracking rows live below all matrix rows
    for i, c in enumerate(cols):
        aug = dict(c)
        aug[shift + i] = Fraction(1)
        red = e.reduce(aug)
        top = {r: v for r, v in red.items() if r < shift}
        if not top:
            out.append({r - shift: v for r, v in red.items()})
        else:
            e.add(red)
    return out


def quotient_dim(den_cols, num_cols):
    """dim (span(num) + span(den)) / span(den), plus indices of num columns
    whose classes form a basis of the quotient."""
    e = Eliminator()
    for c in den_cols:
        e.add(c)
    base = e.rank
    picked = []
    for i, c in enumerate(num_cols):
        if e.add(c):
            picked.append(i)
    return e.rank - base, picked


def stacked_quotient_dim(den_cols, map_cols, constraint_cols):
    """dim of (span(den) + M . ker(C)) / span(den).

    `map_cols` and `constraint_cols` are the columns of M and C over the same
    domain (paired by index).  Uses
    rank [[den, M], [0, C]] = rank C + dim(span(den) + M ker C).
    """
    if len(map_cols) != len(constraint_cols):
        raise ValueError("M and C must share a domain")
    shift = 10**9
    rank_c = rank_of(constraint_cols)
    rank_den = rank_of(den_cols)
    stacked = [dict(c) for c in den_cols]
    for m, c in zip(map_cols, constraint_cols):
        col = dict(m)
        for r, v in c.items():
            col[shift + r] = v
        stacked.append(col)
    return rank_of(stacked) - rank_c - rank_den


def compose(outer_cols, inner_cols) -> list:
    """Columns of outer @ inner (inner columns hold coefficients over the
    outer column index set)."""
    out = []
    for c in inner_cols:
        acc = {}
        for k, v in c.items():
            for r, w in outer_cols[k].items():
                nv = acc.get(r, 0) + v * w
                if nv:
                    acc[r] = nv
                else:
                    acc.pop(r, None)
        out.append(acc)
    return out


def restrict_rows(cols, keep_mask) -> list:
    return [{r: v for r, v in c.items() if keep_mask[r]} for c in cols]


def select_columns(cols, idx) -> list:
    return [cols[i] for i in idx]


def from_scipy(mat) -> list:
    """Columns of a scipy sparse matrix with entries taken as exact
    Fractions of their float values."""
    m = mat.tocsc()
    out = []
    for j in range(m.shape[1]):
        sl = slice(m.indptr[j], m.indptr[j + 1])
        out.append({int(r): Fraction(float(v)) for r, v in zip(m.indices[sl], m.data[sl])})
    return out


def dense_from_columns(cols, n_rows, idx=None):
    import numpy as np

    sel = range(len(cols)) if idx is None else idx
    out = np.zeros((n_rows, len(list(sel))))
    for k, i in enumerate(sel):
        for r, v in cols[i].items():
            out[r, k] = float(v)
    return out
