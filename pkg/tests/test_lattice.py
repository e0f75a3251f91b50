"""Cell complex construction: counts, collars, punctures, products."""

import numpy as np
import pytest

from latticedec import Axis, build_grid, product, spacetime
from latticedec.lattice import mesh_to_dict, grid_from_dict


def total_cells(K):
    return sum(K.num(p) for p in range(K.n + 1))


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis(0)
    with pytest.raises(ValueError):
        Axis(4, spacing=-1.0)
    with pytest.raises(ValueError):
        Axis(4, periodic=True, collar=1)
    with pytest.raises(ValueError):
        Axis(4, collar=2)  # collar swallows everything


def test_open_axis_counts():
    K = build_grid([Axis(10, 0.5)])
    assert K.num(0) == 11
    assert K.num(1) == 10


def test_periodic_axis_counts():
    K = build_grid([Axis(10, 0.5, periodic=True)])
    assert K.num(0) == 10
    assert K.num(1) == 10


def test_product_counts_multiply():
    K1 = build_grid([Axis(6, 1.0)])
    K2 = build_grid([Axis(5, 1.0, periodic=True)])
    K = product(K1, K2)
    assert K.n == 2
    # 1-cells: horizontal edges x vertices + vertices x vertical edges
    assert K.num(1) == 6 * 5 + 7 * 5
    assert K.num(2) == 6 * 5
    assert total_cells(K) == total_cells(K1) * total_cells(K2)


def test_product_matches_build_grid():
    axes = [Axis(5, 0.3, collar=1), Axis(7, 0.8, periodic=True)]
    K1 = product(build_grid([axes[0]]), build_grid([axes[1]]))
    K2 = build_grid(axes)
    for p in range(3):
        assert K1.num(p) == K2.num(p)
        assert np.array_equal(K1.margin(p), K2.margin(p))


def test_collar_is_downward_closed():
    """Every face of a collar cell is itself a collar cell."""
    K = build_grid([Axis(8, 1.0, collar=2), Axis(6, 1.0, collar=1)])
    for p in range(1, K.n + 1):
        rows, cols, _ = K.boundary_int(p)
        hi_collar = K.margin(p)[cols] == 0
        assert (K.margin(p - 1)[rows][hi_collar] == 0).all()


def test_margin_is_graph_lipschitz():
    """Margins of a cell and its faces differ by at most one."""
    K = build_grid([Axis(8, 1.0, collar=1), Axis(8, 1.0, collar=1)],
                   punctures=[((3, 5), (3, 5))])
    for p in range(1, K.n + 1):
        rows, cols, _ = K.boundary_int(p)
        diff = K.margin(p)[cols] - K.margin(p - 1)[rows]
        assert np.abs(diff).max() <= 1


def test_puncture_removes_cells():
    full = build_grid([Axis(8, 1.0, collar=1), Axis(8, 1.0, collar=1)])
    cut = build_grid([Axis(8, 1.0, collar=1), Axis(8, 1.0, collar=1)],
                     punctures=[((3, 5), (3, 5))])
    assert cut.num(2) == full.num(2) - 4
    assert cut.num(1) == full.num(1) - 4  # the 4 interior edges go
    assert cut.num(0) == full.num(0) - 1  # only the interior vertex goes
    # the rim vertices and edges of the puncture are collar
    assert (cut.margin(0) == 0).sum() > (full.margin(0) == 0).sum()
    assert (cut.margin(1) == 0).sum() > (full.margin(1) == 0).sum()


def test_spacetime_cfl_guard():
    base = build_grid([Axis(8, 0.5, periodic=True), Axis(8, 0.5, collar=1)])
    spacetime(base, 8, 0.3)  # 0.3 < 0.5/sqrt(2), fine
    with pytest.raises(ValueError):
        spacetime(base, 8, 0.4)


def test_spacetime_slice_ids(cylinder_21):
    M = cylinder_21
    S = M.slice_ids(1, 0)  # spatial edges per time slice
    n_slices = S.shape[0]
    base_edges = M.base.num(1)
    assert S.shape[1] == base_edges
    all_ids = np.concatenate([S[t] for t in range(n_slices)])
    assert len(np.unique(all_ids)) == len(all_ids)


def test_time_margin_vanishes_at_ends(interval_11):
    M = interval_11
    for p in range(M.n + 1):
        tm = M.time_margin(p)
        assert tm.min() == 0
        assert tm.max() > 2


def test_mesh_dict_roundtrip():
    K = build_grid([Axis(6, 0.5, collar=1), Axis(5, 1.5, periodic=True)],
                   punctures=None)
    K2 = grid_from_dict(mesh_to_dict(K))
    for p in range(K.n + 1):
        assert K2.num(p) == K.num(p)
        assert np.array_equal(K2.margin(p), K.margin(p))
    assert [a.spacing for a in K2.axes] == [a.spacing for a in K.axes]


def test_mesh_dict_roundtrip_punctured():
    K = build_grid([Axis(8, 1.0, collar=1), Axis(8, 1.0, collar=1)],
                   punctures=[((3, 5), (3, 5))])
    K2 = grid_from_dict(mesh_to_dict(K))
    for p in range(K.n + 1):
        assert K2.num(p) == K.num(p)
        assert np.array_equal(K2.margin(p), K.margin(p))
