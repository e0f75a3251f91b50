"""The deformed on-shell algebra: CCR, associativity, center, isomorphisms."""

import numpy as np
import pytest

from latticedec import Axis, Cochain, build_grid, spacetime
from latticedec.calculus import codifferential_matrix, d_matrix, pair
from latticedec.cauchy import green_causal
from latticedec.peierls import canonical_basis, bracket_matrix, radical
from latticedec.weyl import (
    StarAlgebra,
    affine_iso,
    center_basis,
    field_strength_gen,
    onshell_reduce,
)
from latticedec.cohomology import degeneracy_spacetime
from conftest import random_observable


@pytest.fixture(scope="module")
def scalar_alg():
    """Small p=0 algebra: every core vertex is a generator, pi is dense."""
    M = spacetime(build_grid([Axis(10, 0.5, collar=2)]), 10, 0.2, collar_t=2)
    return StarAlgebra.build(M, 0)


@pytest.fixture(scope="module")
def cyl_alg(cylinder_21):
    return StarAlgebra.build(cylinder_21, 1, workers=4)


def random_poly(alg, rng, degree=3, n_terms=4):
    f = alg.zero()
    n = alg.n_generators
    for _ in range(n_terms):
        term = alg.unit(complex(rng.standard_normal(), rng.standard_normal()))
        for _ in range(int(rng.integers(0, degree + 1))):
            term = term.pointwise(alg.generator(int(rng.integers(n))))
        f = f + term
    return f


def test_ccr_exact(scalar_alg):
    alg = scalar_alg
    n = alg.n_generators
    assert n > 2
    for i in range(n):
        for j in range(n):
            c = alg.generator(i).commutator(alg.generator(j))
            assert c.degree <= 0
            assert c.coeff(()) == 1j * alg.pi[i, j]  # bit-exact


def test_star_unit_and_scalars(scalar_alg, rng):
    alg = scalar_alg
    f = random_poly(alg, rng)
    assert (alg.unit(1.0).star(f) - f).norm() <= 1e-14 * max(f.norm(), 1.0)
    assert (f.star(alg.unit(2.0)) - 2.0 * f).norm() <= 1e-13 * max(f.norm(), 1.0)


def test_star_associativity(scalar_alg, rng):
    alg = scalar_alg
    for _ in range(12):
        f, g, h = (random_poly(alg, rng, degree=2, n_terms=3) for _ in range(3))
        lhs = f.star(g).star(h)
        rhs = f.star(g.star(h))
        scale = max(lhs.norm(), 1.0)
        assert (lhs - rhs).norm() <= 1e-12 * scale


def test_jacobi_identity(scalar_alg, rng):
    alg = scalar_alg
    for _ in range(8):
        f, g, h = (random_poly(alg, rng, degree=2, n_terms=3) for _ in range(3))
        j = (f.commutator(g.commutator(h))
             + g.commutator(h.commutator(f))
             + h.commutator(f.commutator(g)))
        scale = max(f.norm() * g.norm() * h.norm(), 1.0)
        assert j.norm() <= 1e-12 * scale


def test_commutator_leading_order_is_bracket(scalar_alg, rng):
    """[f, g] = i {f, g} + higher order: exact for linear f, g."""
    alg = scalar_alg
    n = alg.n_generators
    x = rng.standard_normal(n)
    y = rng.standard_normal(n)
    f = alg.zero()
    g = alg.zero()
    for i in range(n):
        f = f + x[i] * alg.generator(i)
        g = g + y[i] * alg.generator(i)
    c = f.commutator(g)
    assert abs(c.coeff(()) - 1j * float(x @ alg.pi @ y)) <= 1e-12 * max(abs(x @ alg.pi @ y), 1.0)


def test_conjugation_is_an_involution(scalar_alg, rng):
    alg = scalar_alg
    f, g = random_poly(alg, rng), random_poly(alg, rng)
    assert (f.conj().conj() - f).norm() <= 1e-14 * max(f.norm(), 1.0)
    # *(f g) = g* f* for the star product
    lhs = f.star(g).conj()
    rhs = g.conj().star(f.conj())
    assert (lhs - rhs).norm() <= 1e-12 * max(lhs.norm(), 1.0)


def test_onshell_reduce_idempotent_and_multiplicative(scalar_alg, rng):
    alg = scalar_alg
    f, g = random_poly(alg, rng), random_poly(alg, rng)
    rf = onshell_reduce(f)
    assert (onshell_reduce(rf) - rf).norm() <= 1e-12 * max(rf.norm(), 1.0)
    lhs = onshell_reduce(f.pointwise(g))
    rhs = onshell_reduce(f).pointwise(onshell_reduce(g))
    assert (lhs - rhs).norm() <= 1e-12 * max(lhs.norm(), 1.0)


def test_lift_of_trivial_shift_is_constant(cylinder_21, cyl_alg, rng):
    """delta d gamma lifts to the constant pair(j, gamma-part): zero when j=0."""
    M = cylinder_21
    alg = cyl_alg
    gamma = np.zeros(M.num(1))
    off = M.margin(1) >= 1
    gamma[off] = rng.standard_normal(off.sum())
    shift = codifferential_matrix(M, 2) @ (d_matrix(M, 1) @ gamma)
    F = alg.lift(shift)
    assert F.norm() <= 1e-8 * np.abs(gamma).max()


def test_lift_rejects_vectors_outside_the_span(cylinder_21, cyl_alg, rng):
    vals = rng.standard_normal(cylinder_21.num(1))
    with pytest.raises(ValueError):
        cyl_alg.lift(vals)


def test_center_equals_radical_equals_degeneracy(cylinder_21, cyl_alg):
    M = cylinder_21
    centers = center_basis(cyl_alg)
    quantum_rank = len(centers) - 1  # drop the unit
    dim, _ = radical(cyl_alg.basis.observables())
    assert quantum_rank == dim == degeneracy_spacetime(M, 1).dim == 1


def test_center_trivial_on_compact_slice(circle_11):
    alg = StarAlgebra.build(circle_11, 1)
    assert len(center_basis(alg)) == 1  # just the unit


def test_field_strength_generator(scalar_alg, rng):
    """F(beta) = lift(-delta beta) is affine in the generators, and linear
    in beta."""
    alg = scalar_alg
    M = alg.complex
    def make(seed):
        r = np.random.default_rng(seed)
        vals = r.standard_normal(M.num(1))
        vals[M.margin(1) < 4] = 0.0  # deep enough that -delta beta is in span
        return Cochain(M, 1, vals)
    b1, b2 = make(1), make(2)
    F1, F2 = field_strength_gen(alg, b1), field_strength_gen(alg, b2)
    assert F1.degree == 1
    both = field_strength_gen(alg, Cochain(M, 1, b1.values + 2.0 * b2.values))
    assert (both - F1 - 2.0 * F2).norm() <= 1e-9 * max(both.norm(), 1.0)


def test_affine_iso_is_a_homomorphism(cylinder_21, cyl_alg, rng):
    M = cylinder_21
    # an on-shell reference: G of a co-closed compact source solves box A = 0
    src = random_observable(M, 1, rng, margin=3).cochain
    A_ref = green_causal(src)
    iso = affine_iso(cyl_alg, cyl_alg, A_ref)
    for _ in range(6):
        f, g = random_poly(cyl_alg, rng, 2, 3), random_poly(cyl_alg, rng, 2, 3)
        lhs = iso(f.star(g))
        rhs = iso(f).star(iso(g))
        assert (lhs - rhs).norm() <= 1e-12 * max(lhs.norm(), 1.0)
    # linear generators shift by the evaluation against the reference
    i = int(rng.integers(cyl_alg.n_generators))
    gi = cyl_alg.generator(i)
    shifted = iso(gi)
    expect = pair(A_ref, Cochain(M, 1, cyl_alg.basis.vectors[:, i]))
    assert abs(shifted.coeff(()) - expect) <= 1e-10 * max(abs(expect), 1.0)
    assert (shifted - gi - cyl_alg.unit(shifted.coeff(()))).norm() <= 1e-12
