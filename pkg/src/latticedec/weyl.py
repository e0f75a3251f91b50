"""Moyal quantization of the affine space of solutions.

Polynomial observables are written as Weyl-ordered (symmetric) symbols in
the canonical generators; the star product is the degree-truncated Moyal
exponential of the bidifferential contraction (i/2) pi, with pi the
antisymmetric Peierls bracket matrix.  The source current enters through
the on-shell relation: for collar-vanishing beta, the generator of
delta d beta reduces to the constant pair(j, beta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.linalg as la

from .calculus import Cochain, codifferential_matrix, d_matrix, pair, weight_matrix
from .lattice import SpacetimeLattice
from .peierls import (CanonicalBasis, Observable, bracket_matrix,
                      canonical_basis)

DEG_MAX = 6

# a monomial key is a sorted tuple of (generator index, power); () is the unit
Multi = tuple


def _merge(a: Multi, b: Multi) -> Multi:
    acc = dict(a)
    for i, k in b:
        acc[i] = acc.get(i, 0) + k
    return tuple(sorted(acc.items()))


def _degree(m: Multi) -> int:
    return sum(k for _, k in m)


def _derive(m: Multi, i: int):
    """d/d xi_i of the monomial: (power, lowered monomial) or None."""
    for j, (idx, k) in enumerate(m):
        if idx == i:
            low = m[:j] + ((idx, k - 1),) if k > 1 else m[:j]
            return k, low + m[j + 1:]
    return None


class StarAlgebra:
    """The on-shell polynomial algebra for one lattice, degree and current."""

    def __init__(self, basis: CanonicalBasis, pi: np.ndarray,
                 current: Cochain | None = None, deg_max: int = DEG_MAX,
                 rtol: float = 1e-10):
        self.basis = basis
        self.pi = pi
        self.current = current
        self.deg_max = deg_max
        M, p = basis.complex, basis.degree
        self.complex, self.degree = M, p
        self._dd = (codifferential_matrix(M, p + 1) @ d_matrix(M, p)).tocsc()
        self._off = np.flatnonzero(M.margin(p) >= 1)
        self._rtol = rtol

    @classmethod
    def build(cls, M: SpacetimeLattice, p: int, current: Cochain | None = None,
              deg_max: int = DEG_MAX, tol: float = 1e-9, workers: int = 1):
        cb = canonical_basis(M, p)
        bm = bracket_matrix(cb.observables(), tol=tol, workers=workers)
        return cls(cb, bm.matrix, current=current, deg_max=deg_max)

    @property
    def n_generators(self) -> int:
        return self.basis.dim

    # -- constructors -------------------------------------------------------

    def zero(self):
        return StarPolynomial(self, {})

    def unit(self, c=1.0):
        return StarPolynomial(self, {(): complex(c)}) if c else self.zero()

    def generator(self, i: int):
        return StarPolynomial(self, {((i, 1),): 1.0 + 0j})

    def lift(self, alpha, tol: float = 1e-8):
        """The on-shell generator of an observable: its canonical-basis part
        plus the constant pair(j, beta) carried by its delta-d-beta part.

        This is the on-shell reduction: lift(delta d beta) is the pure
        constant pair(j, beta) (zero when j = 0).
        """
        values = alpha.cochain.values if isinstance(alpha, Observable) else np.asarray(alpha, float)
        n = self.basis.dim
        B = np.hstack([self.basis.vectors, self.basis.trivial])
        sol, *_ = la.lstsq(B, values)
        scale = max(1.0, float(np.abs(values).max()))
        if np.abs(B @ sol - values).max() > tol * scale:
            raise ValueError("observable is not in the generator span "
                             "modulo trivial shifts")
        coeff = sol[:n]
        const = 0.0
        triv_part = self.basis.trivial @ sol[n:]
        if self.current is not None and np.abs(triv_part).max() > tol * scale:
            # express the trivial part as delta d beta; the relation turns it
            # into the constant pair(j, beta) (minimum-norm beta, fixed choice)
            A = self._dd[:, self._off].toarray()
            beta_off, *_ = la.lstsq(A, triv_part)
            beta = np.zeros(self.complex.num(self.degree))
            beta[self._off] = beta_off
            const = pair(Cochain(self.complex, self.degree, beta), self.current)
        out = self.unit(const) if const else self.zero()
        for i in np.flatnonzero(np.abs(coeff) > 1e-14):
            out = out + coeff[i] * self.generator(int(i))
        return out


@dataclass(frozen=True)
class StarPolynomial:
    algebra: StarAlgebra
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {m: complex(c) for m, c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)
        if clean and max(_degree(m) for m in clean) > self.algebra.deg_max:
            raise OverflowError("polynomial degree exceeds the cap %d"
                                % self.algebra.deg_max)

    # -- linear structure ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = self.algebra.unit(other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return StarPolynomial(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return StarPolynomial(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = self.algebra.unit(other)
        return self + (-other)

    def __rmul__(self, scalar):
        return StarPolynomial(self.algebra, {m: scalar * c for m, c in self.terms.items()})

    __mul__ = __rmul__

    def _check(self, other):
        if other.algebra is not self.algebra:
            raise ValueError("polynomials live in different algebras")

    @property
    def degree(self) -> int:
        return max((_degree(m) for m in self.terms), default=0)

    def coeff(self, m: Multi = ()) -> complex:
        return self.terms.get(tuple(sorted(m)), 0j)

    def conj(self):
        """The adjoint: generators are real, so conjugate the coefficients."""
        return StarPolynomial(self.algebra, {m: c.conjugate() for m, c in self.terms.items()})

    def norm(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    # -- products -----------------------------------------------------------

    def pointwise(self, other):
        """Commutative product of the symbols (the pi = 0 limit of star)."""
        self._check(other)
        out = {}
        for mf, cf in self.terms.items():
            for mg, cg in other.terms.items():
                m = _merge(mf, mg)
                out[m] = out.get(m, 0) + cf * cg
        return StarPolynomial(self.algebra, out)

    def star(self, other):
        """Moyal product: sum_n (i/2)^n/n! pi^{a1 b1}...  d_a F  d_b G."""
        self._check(other)
        if self.degree + other.degree > self.algebra.deg_max:
            raise OverflowError("star product degree exceeds the cap")
        pi = self.algebra.pi
        out = {}
        tensor = {(mf, mg): cf * cg
                  for mf, cf in self.terms.items()
                  for mg, cg in other.terms.items()}
        n = 0
        while tensor:
            w = (0.5j) ** n / factorial(n)
            for (mf, mg), c in tensor.items():
                m = _merge(mf, mg)
                out[m] = out.get(m, 0) + w * c
            nxt = {}
            for (mf, mg), c in tensor.items():
                for a, _ in mf:
                    da = _derive(mf, a)
                    for b, _ in mg:
                        v = pi[a, b]
                        if v == 0.0:
                            continue
                        db = _derive(mg, b)
                        key = (da[1], db[1])
                        nxt[key] = nxt.get(key, 0) + c * da[0] * db[0] * v
            tensor = {k: v for k, v in nxt.items() if v != 0}
            n += 1
        return StarPolynomial(self.algebra, out)

    def commutator(self, other):
        return self.star(other) - other.star(self)


# ---------------------------------------------------------------------------
# on-shell reduction, center, affine isomorphisms


def onshell_reduce(F: StarPolynomial) -> StarPolynomial:
    """Re-lift every generator through the on-shell relation.  Idempotent;
    the identity on polynomials over the canonical basis (their generators
    carry no delta-d-beta component by construction)."""
    alg = F.algebra
    out = alg.zero()
    for m, c in F.terms.items():
        term = alg.unit(1.0)
        for i, k in m:
            g = alg.lift(alg.basis.vectors[:, i])
            for _ in range(k):
                term = term.pointwise(g)
        out = out + c * term
    return out


def center_basis(alg: StarAlgebra, tol: float = 1e-9):
    """Unit plus the generators spanning the commutant of the algebra.

    The coefficient combinations are the kernel of pi; each returned
    polynomial is verified to commute with every generator.
    """
    out = [alg.unit(1.0)]
    if alg.n_generators == 0:
        return out
    kern = la.null_space(alg.pi, rcond=tol)
    for k in range(kern.shape[1]):
        z = alg.zero()
        for i in np.flatnonzero(np.abs(kern[:, k]) > 1e-14):
            z = z + kern[i, k] * alg.generator(int(i))
        for i in range(alg.n_generators):
            c = z.commutator(alg.generator(i)).norm()
            if c > 1e-12:
                raise AssertionError("center candidate fails to commute: %.3g" % c)
        out.append(z)
    return out


def affine_iso(source: StarAlgebra, target: StarAlgebra, A_ref: Cochain,
               tol: float = 1e-8):
    """The isomorphism A_j -> A_0 induced by an on-shell reference solution:
    generator xi_i maps to evaluate(alpha_i, A_ref) + xi_i.

    Returns a function on polynomials.  Constant shifts of the generators
    are affine symplectomorphisms, so this is automatically a star-algebra
    homomorphism (same pi on both sides).
    """
    M, p = source.complex, source.degree
    if source.basis is not target.basis:
        if source.basis.vectors.shape != target.basis.vectors.shape or \
                not np.array_equal(source.basis.vectors, target.basis.vectors):
            raise ValueError("algebras must share the canonical basis")
    if not np.array_equal(source.pi, target.pi):
        raise ValueError("algebras must share the bracket matrix")
    box_res = codifferential_matrix(M, p + 1) @ (d_matrix(M, p) @ A_ref.values)
    j = source.current.values if source.current is not None else 0.0
    bulk = M.margin(p) >= 1
    worst = float(np.abs((box_res - j)[bulk]).max())
    if worst > tol:
        raise ValueError("reference configuration is off shell: %.3g" % worst)
    wm = weight_matrix(M, p).diagonal()
    shifts = source.basis.vectors.T @ (wm * A_ref.values)

    def apply(F: StarPolynomial) -> StarPolynomial:
        out = target.zero()
        for m, c in F.terms.items():
            term = target.unit(1.0)
            for i, k in m:
                g = target.generator(i) + target.unit(shifts[i])
                for _ in range(k):
                    term = term.pointwise(g)
            out = out + c * term
        return out

    return apply


def field_strength_gen(alg: StarAlgebra, beta: Cochain) -> StarPolynomial:
    """F(beta) := -A(delta beta) for a core-supported (p+1)-cochain beta."""
    if beta.degree != alg.degree + 1:
        raise ValueError("beta must be a (p+1)-cochain")
    alpha = -(codifferential_matrix(alg.complex, alg.degree + 1) @ beta.values)
    return alg.lift(alpha)
