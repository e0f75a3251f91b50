"""Discrete exterior calculus operators on cubical complexes.

Cochains are flat value arrays indexed by global cell id.  The metric enters
only through the diagonal pairing weights sigma * dual_volume / volume; the
codifferential is the exact matrix adjoint of the coboundary with respect to
that pairing, so summation by parts

    pair(delta a, b) == -pair(a, d b)

holds for *all* cochains, to machine precision, on every finite complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .lattice import CellComplex


@dataclass
class Cochain:
    complex: CellComplex
    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.complex.num(self.degree),):
            raise ValueError("value array does not match cell count")

    def copy(self) -> "Cochain":
        return Cochain(self.complex, self.degree, self.values.copy())

    def __add__(self, other):
        _check_same(self, other)
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __mul__(self, k):
        return Cochain(self.complex, self.degree, self.values * float(k))

    __rmul__ = __mul__


def _check_same(a: Cochain, b: Cochain):
    if a.complex is not b.complex or a.degree != b.degree:
        raise ValueError("cochains live on different spaces")


def zero_cochain(K: CellComplex, p: int) -> Cochain:
    return Cochain(K, p, np.zeros(K.num(p)))


@dataclass
class HodgeWeights:
    """Diagonal pairing weights mu*sigma per degree."""

    complex: CellComplex

    def mu(self, p: int) -> np.ndarray:
        return self.complex.dual_volume(p) / self.complex.volume(p)

    def sigma(self, p: int) -> np.ndarray:
        return self.complex.signature(p)

    def weight(self, p: int) -> np.ndarray:
        return self.mu(p) * self.sigma(p)

    def double_star_sign(self, p: int) -> np.ndarray:
        """Per-cell sign of applying the diagonal Hodge star twice.

        The star carries a p-cell to its dual (n-p)-cell with weight
        sign(S,S^c) * sigma_p * mu_p; the dual cell has the complementary
        extrusion pattern, reciprocal mu and, on Lorentzian lattices, the
        complementary time-leg count.  The composite is the stated
        (-1)^(n-1+p(n-p)) (Lorentzian) or (-1)^(p(n-p)) (Riemannian).
        """
        K = self.complex
        n = K.n
        perm = (-1.0) ** (p * (n - p))
        sig_p = self.sigma(p)
        if K.time_axis() is None:
            sig_dual = np.ones_like(sig_p)
        else:
            q = K.time_legs(p)
            q_dual = 1 - q
            sig_dual = np.where(((n - p) - q_dual) % 2 == 0, 1.0, -1.0)
        return perm * sig_p * sig_dual


def weight_matrix(K: CellComplex, p: int) -> sp.dia_matrix:
    w = K.dual_volume(p) / K.volume(p) * K.signature(p)
    return sp.diags(w)


def d_matrix(K: CellComplex, p: int) -> sp.csr_matrix:
    """Coboundary: p-cochains -> (p+1)-cochains."""
    key = ("dmat", p)
    if key not in K._cache:
        K._cache[key] = K.boundary(p + 1).T.tocsr()
    return K._cache[key]


def codifferential_matrix(K: CellComplex, p: int) -> sp.csr_matrix:
    """Pairing adjoint of d: p-cochains -> (p-1)-cochains.

    delta = -W_{p-1}^{-1} B_p W_p, which makes pair(delta a, b) = -pair(a, d b)
    an exact matrix identity.
    """
    key = ("deltamat", p)
    if key not in K._cache:
        w_lo = K.dual_volume(p - 1) / K.volume(p - 1) * K.signature(p - 1)
        w_hi = K.dual_volume(p) / K.volume(p) * K.signature(p)
        B = K.boundary(p)
        K._cache[key] = (-sp.diags(1.0 / w_lo) @ B @ sp.diags(w_hi)).tocsr()
    return K._cache[key]


def box_matrix(K: CellComplex, p: int) -> sp.csr_matrix:
    """Hodge-d'Alembert operator d delta + delta d on p-cochains."""
    key = ("boxmat", p)
    if key not in K._cache:
        n = K.n
        L = sp.csr_matrix((K.num(p), K.num(p)))
        if p > 0:
            L = L + d_matrix(K, p - 1) @ codifferential_matrix(K, p)
        if p < n:
            L = L + codifferential_matrix(K, p + 1) @ d_matrix(K, p)
        K._cache[key] = L.tocsr()
    return K._cache[key]


def d(alpha: Cochain) -> Cochain:
    K = alpha.complex
    return Cochain(K, alpha.degree + 1, d_matrix(K, alpha.degree) @ alpha.values)


def codifferential(alpha: Cochain) -> Cochain:
    K = alpha.complex
    if alpha.degree == 0:
        raise ValueError("codifferential of a 0-cochain is not defined")
    return Cochain(K, alpha.degree - 1, codifferential_matrix(K, alpha.degree) @ alpha.values)


def box(alpha: Cochain) -> Cochain:
    K = alpha.complex
    return Cochain(K, alpha.degree, box_matrix(K, alpha.degree) @ alpha.values)


def pair(alpha: Cochain, beta: Cochain) -> float:
    """Weighted pairing sum_c alpha(c) beta(c) mu(c) sigma(c)."""
    _check_same(alpha, beta)
    K = alpha.complex
    p = alpha.degree
    w = K.dual_volume(p) / K.volume(p) * K.signature(p)
    return float(np.dot(alpha.values, w * beta.values))


# ---------------------------------------------------------------------------
# exact-arithmetic variants (integer incidence, Fraction weights)


def d_columns_exact(K: CellComplex, p: int):
    """Columns of d_p over the rationals: list of {row: Fraction}."""
    rows, cols, vals = K.boundary_int(p + 1)
    out = [dict() for _ in range(K.num(p))]
    # d = B_{p+1}^T: entry d[c_hi, c_lo] = B[c_lo, c_hi]
    for r, c, v in zip(rows, cols, vals):
        out[int(r)][int(c)] = Fraction(int(v))
    return out


def codifferential_columns_exact(K: CellComplex, p: int):
    """Columns of delta_p over the rationals."""
    w_lo = K.weights_exact(p - 1)
    w_hi = K.weights_exact(p)
    rows, cols, vals = K.boundary_int(p)
    out = [dict() for _ in range(K.num(p))]
    for r, c, v in zip(rows, cols, vals):
        r, c = int(r), int(c)
        out[c][r] = -Fraction(int(v)) * w_hi[c] / w_lo[r]
    return out
