"""Embeddings between lattices and what they do to observables."""

import numpy as np
import pytest

from latticedec import Axis, Cochain, build_grid, spacetime
from latticedec.calculus import codifferential_matrix, d_matrix, pair
from latticedec.covariance import (
    MeshEmbedding,
    degenerate_generator,
    flux_classes,
    identity_embedding,
    morphism_kernel,
    propagator_compat,
)
from latticedec.peierls import bracket, canonical_basis
from latticedec.cohomology import degeneracy_spacetime
from conftest import random_observable


@pytest.fixture(scope="module")
def widening():
    """Annulus into a wider annulus, centered: the image is honestly interior."""
    src = build_grid([Axis(8, 1.0, periodic=True), Axis(6, 1.0, collar=1)])
    tgt = build_grid([Axis(8, 1.0, periodic=True), Axis(10, 1.0, collar=1)])
    return MeshEmbedding(spacetime(src, 10, 0.5, 2),
                         spacetime(tgt, 10, 0.5, 2), (0, 0, 2))


@pytest.fixture(scope="module")
def closing():
    """Annulus into a torus: the interval axis closes up periodically."""
    src = build_grid([Axis(8, 1.0, periodic=True), Axis(6, 1.0, collar=1)])
    tgt = build_grid([Axis(8, 1.0, periodic=True), Axis(8, 1.0, periodic=True)])
    return MeshEmbedding(spacetime(src, 10, 0.5, 2),
                         spacetime(tgt, 10, 0.5, 2), (0, 0, 1))


def test_identity_embedding_is_the_identity(cylinder_21):
    M = cylinder_21
    psi = identity_embedding(M)
    for p in range(M.n + 1):
        assert np.array_equal(psi.cell_map(p), np.arange(M.num(p)))


def test_embedding_guards():
    src = build_grid([Axis(8, 1.0, periodic=True), Axis(6, 1.0, collar=1)])
    tgt = build_grid([Axis(8, 1.0, periodic=True), Axis(10, 0.5, collar=1)])
    with pytest.raises(ValueError):
        # mismatched spacing on the open axis: volumes differ
        MeshEmbedding(spacetime(src, 8, 0.4, 2), spacetime(tgt, 8, 0.4, 2), (0, 0, 2))


def test_pushforward_commutes_with_d(widening, rng):
    psi = widening
    M, T = psi.source, psi.target
    vals = rng.standard_normal(M.num(1))
    vals[M.margin(1) < 2] = 0.0
    a = Cochain(M, 1, vals)
    lhs = d_matrix(T, 1) @ psi.pushforward(a, min_margin=2).values
    rhs = psi.pushforward(Cochain(M, 2, d_matrix(M, 1) @ a.values), min_margin=1).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(np.abs(vals).max(), 1.0)


def test_pushforward_preserves_pairings(widening, rng):
    psi = widening
    M = psi.source
    a = random_observable(M, 1, rng, margin=2)
    vals = rng.standard_normal(M.num(1))
    vals[M.margin(1) < 2] = 0.0
    b = Cochain(M, 1, vals)
    assert np.abs(a.cochain.values).max() > 0
    lhs = pair(a.cochain, b)
    rhs = pair(psi.pushforward(a.cochain, min_margin=2),
               psi.pushforward(b, min_margin=2))
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_propagator_compatibility(widening, rng):
    psi = widening
    M = psi.source
    for _ in range(5):
        a = random_observable(M, 1, rng, margin=2)
        b = random_observable(M, 1, rng, margin=2)
        assert np.abs(a.cochain.values).max() > 0
        lhs, rhs = propagator_compat(psi, a, b, min_margin=1)
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), 1.0)


def test_propagator_compatibility_into_torus(closing, rng):
    psi = closing
    M = psi.source
    for _ in range(3):
        a = random_observable(M, 1, rng, margin=2)
        b = random_observable(M, 1, rng, margin=2)
        assert np.abs(a.cochain.values).max() > 0
        lhs, rhs = propagator_compat(psi, a, b, min_margin=1)
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), 1.0)


def test_flux_class_count_matches_degeneracy(cylinder_21, circle_11):
    fc = flux_classes(cylinder_21, 1)
    assert fc.dim == degeneracy_spacetime(cylinder_21, 1).dim == 1
    assert flux_classes(circle_11, 1).dim == 0


def test_degenerate_generator_is_bracket_null(cylinder_21, rng):
    M = cylinder_21
    nu = degenerate_generator(M, 1)
    for obs in canonical_basis(M, 1).observables()[:6]:
        assert abs(bracket(nu, obs)) <= 1e-10 * np.abs(nu.cochain.values).max()


def test_morphism_kernel_closing_branch(closing):
    k = morphism_kernel(closing, 1)
    assert k.source_dim == 1
    assert k.dim == 0  # the flux class survives on the torus


def test_morphism_kernel_filled_puncture():
    src = build_grid([Axis(12, 1.0, collar=1), Axis(12, 1.0, collar=1)],
                     punctures=[((5, 7), (5, 7))])
    tgt = build_grid([Axis(12, 1.0, collar=1), Axis(12, 1.0, collar=1)])
    psi = MeshEmbedding(spacetime(src, 8, 0.5, 2), spacetime(tgt, 8, 0.5, 2),
                        (0, 0, 0))
    k = morphism_kernel(psi, 1)
    assert k.source_dim == 1
    assert k.dim == 1  # filling the puncture kills the class
    assert len(k.members) == 1
    # the dying member is a genuine observable with nonzero values
    assert np.abs(k.members[0].cochain.values).max() > 0


def test_embedding_composition(widening):
    psi = widening
    ident = identity_embedding(psi.target)
    comp = ident.compose(psi)
    for p in range(psi.source.n + 1):
        assert np.array_equal(comp.cell_map(p), psi.cell_map(p))
