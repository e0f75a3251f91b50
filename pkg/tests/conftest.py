import numpy as np
import pytest

from latticedec import Axis, Cochain, build_grid, spacetime
from latticedec.calculus import codifferential_matrix
from latticedec.peierls import Observable


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def interval_11():
    """1+1: open interval base with collar, the smallest nontrivial lattice."""
    base = build_grid([Axis(16, 0.5, collar=2)])
    return spacetime(base, 16, 0.2, collar_t=2)


@pytest.fixture(scope="session")
def circle_11():
    base = build_grid([Axis(12, 0.5, periodic=True)])
    return spacetime(base, 12, 0.2, collar_t=2)


@pytest.fixture(scope="session")
def cylinder_21():
    """2+1: time x (circle x interval), the annulus-like workhorse."""
    base = build_grid([Axis(8, 0.7, periodic=True), Axis(8, 0.6, collar=2)])
    return spacetime(base, 12, 0.2, collar_t=2)


@pytest.fixture(scope="session")
def punctured_21():
    base = build_grid([Axis(8, 0.5, collar=1), Axis(8, 0.5, collar=1)],
                      punctures=[((3, 5), (3, 5))])
    return spacetime(base, 10, 0.2, collar_t=2)


def random_observable(M, p, rng, margin=2):
    """Co-closed, core-supported observable: delta of a compact (p+1)-cochain."""
    vals = rng.standard_normal(M.num(p + 1))
    vals[M.margin(p + 1) < margin] = 0.0
    a = codifferential_matrix(M, p + 1) @ vals
    return Observable(Cochain(M, p, a))


def random_compact_source(M, p, rng, margin=2, time_margin=3):
    vals = np.zeros(M.num(p))
    ok = np.where((M.margin(p) >= margin) & (M.time_margin(p) >= time_margin))[0]
    assert ok.size > 0
    vals[ok] = rng.standard_normal(ok.size)
    return Cochain(M, p, vals)
