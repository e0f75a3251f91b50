"""Gauge-invariant linear observables and the Peierls bracket.

An observable is a co-closed p-cochain supported away from the collar; it
acts on field configurations through the weighted pairing.  The Peierls
bracket of two observables is pair(alpha, G beta) with G the causal
propagator, and it can be cross-checked against the equal-time form
built from Cauchy data of G alpha and G beta on any bulk slice.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .calculus import Cochain, codifferential_matrix, d_matrix, pair
from .cauchy import green_causal, slice_E, slice_a
from .lattice import CORE_MARGIN, SpacetimeLattice


@dataclass
class Observable:
    """A smearing p-cochain: supported off the collar and co-closed.

    Co-closedness makes evaluation gauge invariant: for any chi,
    pair(A + d chi, alpha) = pair(A, alpha) - pair(chi, delta alpha).
    """

    cochain: Cochain
    tol: float = 1e-10

    def __post_init__(self):
        M = self.cochain.complex
        p = self.cochain.degree
        collar = M.margin(p) < 1
        if collar.any():
            worst = float(np.abs(self.cochain.values[collar]).max())
            if worst > self.tol:
                raise ValueError("observable touches the collar: %.3g" % worst)
        if p >= 1:
            r = codifferential_matrix(M, p) @ self.cochain.values
            worst = float(np.abs(r).max())
            if worst > self.tol:
                raise ValueError("observable is not co-closed: %.3g" % worst)

    @property
    def complex(self):
        return self.cochain.complex

    @property
    def degree(self):
        return self.cochain.degree

    def evaluate(self, A: Cochain) -> float:
        return pair(A, self.cochain)


def bracket(alpha: Observable, beta: Observable) -> float:
    """Peierls bracket {F_alpha, F_beta} = pair(alpha, G beta)."""
    return pair(alpha.cochain, green_causal(beta.cochain))


def _slice_weights(M: SpacetimeLattice, p: int) -> np.ndarray:
    """Riemannian weights of the base p-cells (sigma = +1 on the slice)."""
    base = M.base
    return base.dual_volume(p) / base.volume(p)


def bracket_via_data(alpha: Observable, beta: Observable, t0: int) -> float:
    """Equal-time form of the bracket from Cauchy data of G alpha, G beta:

        (-1)^p sum_s [ E_beta(s) a_alpha(s) - E_alpha(s) a_beta(s) ] mu_Sigma(s)

    over base p-cells s of slice t0.  Equals bracket() on any bulk slice.

    The (-1)^p prefactor is the signature factor: the spacetime pairing
    weights carry (-1)^(p-q) per cell (q time legs), while the slice sum is
    a purely Riemannian pairing of spatial data, so integrating the bulk
    pairing by parts onto a slice leaves one global (-1)^p behind.
    """
    ga = green_causal(alpha.cochain)
    gb = green_causal(beta.cochain)
    M = alpha.complex
    p = alpha.degree
    w = _slice_weights(M, p)
    aA, EA = slice_a(ga, t0), slice_E(ga, t0)
    aB, EB = slice_a(gb, t0), slice_E(gb, t0)
    return float((-1.0) ** p * np.sum((EB * aA - EA * aB) * w))


# ---------------------------------------------------------------------------
# canonical generator basis: the observable quotient space


def _trivial_directions(M: SpacetimeLattice, p: int) -> np.ndarray:
    """Dense columns spanning the bracket-null shifts delta d gamma for
    collar-vanishing gamma.  G(delta d gamma) = 0 for every such gamma (the
    summation-by-parts boundary terms land in the temporal collar where
    gamma vanishes), so these directions never contribute to a bracket."""
    off = np.flatnonzero(M.margin(p) >= 1)
    if off.size == 0:
        return np.zeros((M.num(p), 0))
    dd = (codifferential_matrix(M, p + 1) @ d_matrix(M, p)).tocsc()
    return dd[:, off].toarray()


@dataclass
class CanonicalBasis:
    """Orthonormal representatives of the observable quotient space.

    `vectors` has one column per class; each column is co-closed, vanishes
    on the collar, and is Euclidean-orthogonal to every trivial shift
    delta d gamma.  `trivial` spans the shifts themselves.
    """

    complex: SpacetimeLattice
    degree: int
    vectors: np.ndarray
    trivial: np.ndarray  # all shifts delta d gamma (may spill onto the collar)
    null_in_space: np.ndarray  # the shifts that are themselves observables

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def observables(self):
        return [Observable(Cochain(self.complex, self.degree, self.vectors[:, k]))
                for k in range(self.dim)]

    def canonicalize(self, values: np.ndarray) -> np.ndarray:
        """Deterministic class representative: project out the trivial part."""
        if self.trivial.shape[1] == 0:
            return values.copy()
        q = self.trivial
        return values - q @ (q.T @ values)


def canonical_basis(M: SpacetimeLattice, p: int, rtol: float = 1e-10) -> CanonicalBasis:
    """Basis of {core-supported, co-closed p-cochains} / {delta d gamma}.

    Generators are supported at margin >= CORE_MARGIN: deep enough that none
    of them is a pure near-collar class (those are bracket-null artifacts of
    truncating the lattice and would inflate the radical).  The quotient is
    by the intersection of span{delta d gamma : gamma off-collar} with the
    generator space, so every basis column is a valid Observable.
    """
    keep = np.flatnonzero(M.margin(p) >= CORE_MARGIN)
    if p == 0:
        kern = np.zeros((M.num(p), keep.size))
        kern[keep, np.arange(keep.size)] = 1.0
    else:
        delta = codifferential_matrix(M, p).tocsc()[:, keep].toarray()
        ns = la.null_space(delta, rcond=rtol)
        kern = np.zeros((M.num(p), ns.shape[1]))
        kern[keep] = ns
    triv = _trivial_directions(M, p)
    if triv.shape[1]:
        triv = la.orth(triv, rcond=rtol)
    null_in = np.zeros((M.num(p), 0))
    if triv.shape[1] and kern.shape[1]:
        mix = la.null_space(np.hstack([kern, -triv]), rcond=rtol)
        if mix.shape[1]:
            null_in = la.orth(kern @ mix[:kern.shape[1]], rcond=rtol)
            kern = kern - null_in @ (null_in.T @ kern)
    reps = la.orth(kern, rcond=rtol) if kern.shape[1] else kern
    return CanonicalBasis(M, p, reps, triv, null_in)


# ---------------------------------------------------------------------------
# bracket matrix and radical


@dataclass
class BracketMatrix:
    observables: list
    matrix: np.ndarray
    radical_basis: np.ndarray = field(init=False)
    tol: float = 1e-9

    def __post_init__(self):
        pi = self.matrix
        if not np.array_equal(pi, -pi.T):
            raise ValueError("bracket matrix must be exactly antisymmetric")
        if pi.size:
            s = la.svd(pi, compute_uv=False)
            scale = max(float(s[0]), 1.0)
            null = s < self.tol * scale
            near = (s >= 0.1 * self.tol * scale) & (s < 10 * self.tol * scale)
            if near.any():
                warnings.warn("bracket rank is ambiguous at tolerance %g: "
                              "singular values %s" % (self.tol, s[near]))
            self.radical_basis = la.null_space(pi, rcond=self.tol)
        else:
            self.radical_basis = np.zeros((0, 0))

    @property
    def radical_dim(self) -> int:
        return self.radical_basis.shape[1]


def bracket_matrix(observables, tol: float = 1e-9, workers: int = 1) -> BracketMatrix:
    """Antisymmetric matrix pi[i, j] = bracket(obs_i, obs_j).

    Only the upper triangle is solved for; the lower triangle is its exact
    negative, so pi = -pi.T holds to the bit.  The solves are independent,
    so with workers > 1 they run on a thread pool (deterministic result
    ordering either way).
    """
    n = len(observables)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            greens = list(pool.map(lambda o: green_causal(o.cochain), observables))
    else:
        greens = [green_causal(o.cochain) for o in observables]
    pi = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = pair(observables[i].cochain, greens[j])
            pi[i, j] = v
            pi[j, i] = -v
    return BracketMatrix(observables, pi, tol=tol)


def radical(observables, tol: float = 1e-9):
    """Kernel of the bracket matrix over the span of the given observables.

    Returns (dimension, coefficient matrix): each column of the coefficient
    matrix combines the generators into a degenerate observable.
    """
    bm = bracket_matrix(observables, tol=tol)
    return bm.radical_dim, bm.radical_basis
