"""Cubical cell complexes built as products of 1D axes.

A complex is the product of open-interval and circle axes, possibly with
rectangular blocks of top-cells removed ("punctures").  A cell is identified
by its *type* -- the tuple of per-axis kinds (0 = sitting at a vertex of that
axis, 1 = extruded along an edge of that axis) -- together with an integer
position per axis.  All per-cell data (kept mask, region margin, global id)
is stored as one numpy array per type, which keeps even four-dimensional
lattices cheap to enumerate.

Regions: every cell carries an integer *margin*, its graph distance in the
cell-incidence graph to the nearest COLLAR cell.  COLLAR cells (margin 0) are
the first ``collar`` cells at every open end plus the rim of every puncture;
margins 1-2 are INTERIOR, margins >= 3 are CORE.  COLLAR is a closed
subcomplex: every face of a collar cell is collar.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

BIG_MARGIN = 10**6
INTERIOR_BAND = 2
CORE_MARGIN = INTERIOR_BAND + 1

REGION_CORE = 0
REGION_INTERIOR = 1
REGION_COLLAR = 2
REGION_NAMES = {REGION_CORE: "CORE", REGION_INTERIOR: "INTERIOR", REGION_COLLAR: "COLLAR"}


@dataclass(frozen=True)
class Axis:
    """One factor of a product lattice: `n_cells` segments of length `spacing`."""

    n_cells: int
    spacing: float = 1.0
    periodic: bool = False
    collar: int = 0
    timelike: bool = False

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("axis needs at least one cell")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.periodic and self.collar != 0:
            raise ValueError("periodic axes carry no collar")
        if not self.periodic and 2 * self.collar >= self.n_cells:
            raise ValueError("collar swallows the whole axis")

    @property
    def n_vertices(self) -> int:
        return self.n_cells if self.periodic else self.n_cells + 1

    def n_positions(self, kind: int) -> int:
        return self.n_cells if kind else self.n_vertices

    def margins(self, kind: int) -> np.ndarray:
        """Graph distance (along this axis only) to the axis' collar cells."""
        n = self.n_positions(kind)
        if self.periodic or self.collar == 0:
            return np.full(n, BIG_MARGIN, dtype=np.int64)
        w = self.collar
        idx = np.arange(n)
        if kind == 0:
            # collar vertices are 0..w and n_cells-w..n_cells
            left = idx - w
            right = (self.n_cells - w) - idx
            m = 2 * np.minimum(left, right)
        else:
            # collar edges are 0..w-1 and n_cells-w..n_cells-1
            left = 2 * (idx - w) + 1
            right = 2 * ((self.n_cells - w - 1) - idx) + 1
            m = np.minimum(left, right)
        return np.maximum(m, 0)

    def dual_lengths(self) -> np.ndarray:
        """Dual (vertex) cell lengths: h in the interior, h/2 at open ends."""
        d = np.full(self.n_vertices, self.spacing)
        if not self.periodic:
            d[0] = d[-1] = self.spacing / 2.0
        return d

    def dual_lengths_exact(self) -> list:
        h = Fraction(self.spacing)
        d = [h] * self.n_vertices
        if not self.periodic:
            d[0] = d[-1] = h / 2
        return d


@dataclass
class CellBlock:
    """All cells of one type, as dense position arrays."""

    type_: tuple
    shape: tuple
    kept: np.ndarray
    margin: np.ndarray
    ids: np.ndarray = field(default=None)

    @property
    def degree(self) -> int:
        return sum(self.type_)


def _types(n_axes: int):
    by_degree = [[] for _ in range(n_axes + 1)]
    for T in itertools.product((0, 1), repeat=n_axes):
        by_degree[sum(T)].append(T)
    for lst in by_degree:
        lst.sort()
    return by_degree


class CellComplex:
    def __init__(self, axes, blocks):
        self.axes = tuple(axes)
        self.n = len(self.axes)
        self.types_by_degree = _types(self.n)
        self.blocks = blocks
        self.punctures = ()
        self._assign_ids()
        self._cache = {}

    # -- construction ------------------------------------------------------

    def _assign_ids(self):
        self.num_cells = [0] * (self.n + 1)
        for p in range(self.n + 1):
            count = 0
            for T in self.types_by_degree[p]:
                blk = self.blocks[T]
                ids = np.full(blk.shape, -1, dtype=np.int64)
                k = int(blk.kept.sum())
                ids[blk.kept] = np.arange(count, count + k)
                blk.ids = ids
                count += k
            self.num_cells[p] = count

    def num(self, p: int) -> int:
        return self.num_cells[p]

    # -- incidence ---------------------------------------------------------

    def boundary_int(self, p: int):
        """Signed incidence of p-cells on (p-1)-cells as integer COO triples."""
        key = ("bint", p)
        if key in self._cache:
            return self._cache[key]
        rows, cols, vals = [], [], []
        for T in self.types_by_degree[p]:
            blk = self.blocks[T]
            pos = np.indices(blk.shape)
            src = blk.ids
            for a, ext in enumerate(T):
                if not ext:
                    continue
                koszul = (-1) ** sum(T[:a])
                T2 = T[:a] + (0,) + T[a + 1:]
                tgt_blk = self.blocks[T2]
                axis = self.axes[a]
                for off, s in ((0, -1), (1, +1)):  # boundary(edge_i) = v_{i+1} - v_i
                    coords = [pos[b] for b in range(self.n)]
                    c = pos[a] + off
                    if axis.periodic:
                        c = c % axis.n_vertices
                    coords[a] = c
                    tgt = tgt_blk.ids[tuple(coords)]
                    mask = (src >= 0) & (tgt >= 0)
                    rows.append(tgt[mask])
                    cols.append(src[mask])
                    vals.append(np.full(int(mask.sum()), s * koszul, dtype=np.int64))
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            vals = np.concatenate(vals)
        else:
            rows = cols = vals = np.zeros(0, dtype=np.int64)
        self._cache[key] = (rows, cols, vals)
        return self._cache[key]

    def boundary(self, p: int) -> sp.csr_matrix:
        """Boundary matrix: (num(p-1) x num(p)), float entries +-1."""
        key = ("b", p)
        if key not in self._cache:
            rows, cols, vals = self.boundary_int(p)
            m = sp.coo_matrix(
                (vals.astype(float), (rows, cols)),
                shape=(self.num(p - 1), self.num(p)),
            )
            self._cache[key] = m.tocsr()
        return self._cache[key]

    # -- per-cell data -----------------------------------------------------

    def _gather(self, p, fn):
        out = []
        for T in self.types_by_degree[p]:
            blk = self.blocks[T]
            out.append(fn(T, blk))
        return np.concatenate(out) if out else np.zeros(0)

    def margin(self, p: int) -> np.ndarray:
        key = ("margin", p)
        if key not in self._cache:
            self._cache[key] = self._gather(p, lambda T, blk: blk.margin[blk.kept])
        return self._cache[key]

    def region(self, p: int) -> np.ndarray:
        m = self.margin(p)
        return np.where(m == 0, REGION_COLLAR, np.where(m <= INTERIOR_BAND, REGION_INTERIOR, REGION_CORE)).astype(np.int8)

    def volume(self, p: int) -> np.ndarray:
        key = ("vol", p)
        if key not in self._cache:
            def fn(T, blk):
                v = 1.0
                for a, ext in enumerate(T):
                    if ext:
                        v *= self.axes[a].spacing
                return np.full(int(blk.kept.sum()), v)
            self._cache[key] = self._gather(p, fn)
        return self._cache[key]

    def dual_volume(self, p: int) -> np.ndarray:
        key = ("dvol", p)
        if key not in self._cache:
            def fn(T, blk):
                arr = np.ones(blk.shape)
                for a, ext in enumerate(T):
                    if not ext:
                        d = self.axes[a].dual_lengths()
                        sh = [1] * self.n
                        sh[a] = -1
                        arr = arr * d.reshape(sh)
                return arr[blk.kept]
            self._cache[key] = self._gather(p, fn)
        return self._cache[key]

    def time_axis(self):
        for a, ax in enumerate(self.axes):
            if ax.timelike:
                return a
        return None

    def time_legs(self, p: int) -> np.ndarray:
        """Number of timelike extrusions per p-cell (0 or 1)."""
        a = self.time_axis()

        def fn(T, blk):
            q = T[a] if a is not None else 0
            return np.full(int(blk.kept.sum()), q, dtype=np.int64)
        return self._gather(p, fn).astype(np.int64)

    def signature(self, p: int) -> np.ndarray:
        """Lorentzian sign per cell: (-1)^(p-q), q = number of time legs."""
        if self.time_axis() is None:
            return np.ones(self.num(p))
        q = self.time_legs(p)
        return np.where((p - q) % 2 == 0, 1.0, -1.0)

    # exact (Fraction) weights, for the rational-arithmetic paths ----------

    def weights_exact(self, p: int) -> list:
        """sigma * dual_volume / volume per p-cell, as exact Fractions."""
        key = ("wexact", p)
        if key in self._cache:
            return self._cache[key]
        ta = self.time_axis()
        out = []
        for T in self.types_by_degree[p]:
            blk = self.blocks[T]
            vol = Fraction(1)
            for a, ext in enumerate(T):
                if ext:
                    vol *= Fraction(self.axes[a].spacing)
            duals = [None if T[a] else self.axes[a].dual_lengths_exact() for a in range(self.n)]
            q = T[ta] if ta is not None else 0
            sgn = -1 if (ta is not None and (p - q) % 2 == 1) else 1
            it = np.argwhere(blk.kept)
            for posv in it:
                d = Fraction(1)
                for a in range(self.n):
                    if duals[a] is not None:
                        d *= duals[a][posv[a]]
                out.append(sgn * d / vol)
        self._cache[key] = out
        return out

    # -- names --------------------------------------------------------------

    def names(self, p: int) -> list:
        key = ("names", p)
        if key in self._cache:
            return self._cache[key]
        out = [None] * self.num(p)
        for T in self.types_by_degree[p]:
            blk = self.blocks[T]
            for posv in np.argwhere(blk.kept):
                cid = blk.ids[tuple(posv)]
                out[cid] = "x".join(
                    ("e%d" if T[a] else "v%d") % posv[a] for a in range(self.n)
                )
        self._cache[key] = out
        return out

    def cell_index(self, p: int, name: str) -> int:
        key = ("nameidx", p)
        if key not in self._cache:
            self._cache[key] = {nm: i for i, nm in enumerate(self.names(p))}
        return self._cache[key][name]


# ---------------------------------------------------------------------------
# constructors


def _covering_top_masks(axes, T, shape, pmask):
    """(all_covering_in_P, any_covering_in_P) for every position of type T."""
    n = len(axes)
    all_in = np.ones(shape, dtype=bool)
    any_in = np.zeros(shape, dtype=bool)
    vert_axes = [a for a in range(n) if not T[a]]
    pos = np.indices(shape)
    for offs in itertools.product((-1, 0), repeat=len(vert_axes)):
        coords = [pos[b].copy() for b in range(n)]
        exists = np.ones(shape, dtype=bool)
        for a, off in zip(vert_axes, offs):
            c = pos[a] + off
            if axes[a].periodic:
                c = c % axes[a].n_cells
            else:
                bad = (c < 0) | (c >= axes[a].n_cells)
                exists &= ~bad
                c = np.clip(c, 0, axes[a].n_cells - 1)
            coords[a] = c
        val = pmask[tuple(coords)]
        all_in &= val | ~exists
        any_in |= val & exists
    return all_in, any_in


def _bfs_margins(K: CellComplex, cap: int = 12):
    """Exact margins by BFS over the cell incidence graph from COLLAR cells."""
    offsets = np.cumsum([0] + K.num_cells)
    total = offsets[-1]
    rows, cols = [], []
    for p in range(1, K.n + 1):
        r, c, _ = K.boundary_int(p)
        rows.append(r + offsets[p - 1])
        cols.append(c + offsets[p])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    ones = np.ones(len(rows), dtype=bool)
    adj = sp.coo_matrix((ones, (rows, cols)), shape=(total, total)).tocsr()
    adj = (adj + adj.T).astype(bool)
    dist = np.full(total, BIG_MARGIN, dtype=np.int64)
    frontier = np.zeros(total, dtype=bool)
    for p in range(K.n + 1):
        seed = K.margin(p) == 0
        frontier[offsets[p]:offsets[p + 1]][seed] = True
    dist[frontier] = 0
    visited = frontier.copy()
    for level in range(1, cap + 1):
        frontier = (adj @ frontier) & ~visited
        if not frontier.any():
            break
        dist[frontier] = level
        visited |= frontier
    return [dist[offsets[p]:offsets[p + 1]] for p in range(K.n + 1)]


def build_grid(axes, punctures=None) -> CellComplex:
    """Build the cubical complex of a product of axes.

    `punctures` is a list of boxes, each a tuple of per-axis (lo, hi) cell
    index ranges (hi exclusive).  The top-cells inside each box, and every
    lower cell all of whose covering top-cells are punctured, are deleted;
    surviving cells bordering a puncture are tagged COLLAR (margin 0).
    """
    axes = tuple(ax if isinstance(ax, Axis) else Axis(*ax) for ax in axes)
    n = len(axes)
    top_shape = tuple(ax.n_cells for ax in axes)
    pmask = np.zeros(top_shape, dtype=bool)
    for box in punctures or ():
        sel = tuple(slice(lo, hi) for lo, hi in box)
        pmask[sel] = True

    blocks = {}
    for T in itertools.product((0, 1), repeat=n):
        shape = tuple(axes[a].n_positions(T[a]) for a in range(n))
        # axis margins: min over axes of the per-axis collar distance
        margin = np.full(shape, BIG_MARGIN, dtype=np.int64)
        for a in range(n):
            sh = [1] * n
            sh[a] = -1
            margin = np.minimum(margin, axes[a].margins(T[a]).reshape(sh))
        kept = np.ones(shape, dtype=bool)
        if pmask.any():
            all_in, any_in = _covering_top_masks(axes, T, shape, pmask)
            kept = ~all_in
            margin = np.where(any_in & kept, 0, margin)
        blocks[T] = CellBlock(T, shape, kept, margin)

    K = CellComplex(axes, blocks)
    K.punctures = tuple(tuple((int(lo), int(hi)) for lo, hi in box)
                        for box in punctures or ())
    if pmask.any():
        # rims make the closed-form margins wrong away from the rim: redo by BFS
        exact = _bfs_margins(K)
        for p in range(n + 1):
            for T in K.types_by_degree[p]:
                blk = K.blocks[T]
                m = np.full(blk.shape, BIG_MARGIN, dtype=np.int64)
                m[blk.kept] = exact[p][blk.ids[blk.kept]]
                blk.margin = m
        K._cache.clear()
    return K


def product(K1: CellComplex, K2: CellComplex) -> CellComplex:
    """Product complex.  Margins combine as minima, kept masks as AND."""
    n1 = K1.n
    blocks = {}
    for T1, b1 in K1.blocks.items():
        for T2, b2 in K2.blocks.items():
            T = T1 + T2
            kept = np.logical_and.outer(b1.kept, b2.kept)
            margin = np.minimum.outer(b1.margin, b2.margin)
            blocks[T] = CellBlock(T, b1.shape + b2.shape, kept, margin)
    K = CellComplex(K1.axes + K2.axes, blocks)
    # a puncture box in a factor removes the box times every top cell of the
    # other factor, so the boxes extend exactly
    full1 = tuple((0, ax.n_cells) for ax in K1.axes)
    full2 = tuple((0, ax.n_cells) for ax in K2.axes)
    K.punctures = tuple(box + full2 for box in K1.punctures) + \
        tuple(full1 + box for box in K2.punctures)
    return K


class SpacetimeLattice(CellComplex):
    """Product of a timelike interval axis with a spatial base complex."""

    def __init__(self, base: CellComplex, n_t: int, dt: float, collar_t: int):
        if any(ax.timelike for ax in base.axes):
            raise ValueError("base complex must be purely spatial")
        hmin = min(ax.spacing for ax in base.axes)
        if dt > hmin / np.sqrt(base.n) + 1e-12:
            raise ValueError(
                "time step %.6g violates the stability bound %g" % (dt, hmin / np.sqrt(base.n))
            )
        taxis = Axis(n_t, dt, periodic=False, collar=collar_t, timelike=True)
        tK = build_grid([taxis])
        prod = product(tK, base)
        super().__init__(prod.axes, prod.blocks)
        self.base = base
        self.dt = dt
        self.n_t = n_t
        self.w_t = collar_t

    def time_level(self, p: int) -> np.ndarray:
        """Half-integer time level (2*t + extruded) per p-cell."""
        def fn(T, blk):
            pos0 = np.indices(blk.shape)[0]
            return (2 * pos0 + T[0])[blk.kept]
        return self._gather(p, fn).astype(np.int64)

    def time_margin(self, p: int) -> np.ndarray:
        """Collar distance along the time axis only."""
        def fn(T, blk):
            m = self.axes[0].margins(T[0])
            sh = [1] * self.n
            sh[0] = -1
            return np.broadcast_to(m.reshape(sh), blk.shape)[blk.kept]
        return self._gather(p, fn).astype(np.int64)

    def slice_ids(self, p: int, q: int) -> np.ndarray:
        """Global ids arranged as [time position, base cell id] for the
        sub-family of p-cells with q time legs.  Deleted cells are -1."""
        key = ("slice", p, q)
        if key in self._cache:
            return self._cache[key]
        cols = []
        for Tb in self.base.types_by_degree[p - q]:
            blk = self.blocks[(q,) + Tb]
            nt = self.axes[0].n_positions(q)
            ids = blk.ids.reshape(nt, -1)
            basekept = self.base.blocks[Tb].kept.ravel()
            cols.append(ids[:, basekept])
        out = np.concatenate(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.int64)
        self._cache[key] = out
        return out


def spacetime(base: CellComplex, n_t: int, dt: float, collar_t: int = 2) -> SpacetimeLattice:
    return SpacetimeLattice(base, n_t, dt, collar_t)


# ---------------------------------------------------------------------------
# mesh (de)serialization


def mesh_to_dict(K: CellComplex) -> dict:
    d = {
        "axes": [
            {
                "cells": ax.n_cells,
                "spacing": ax.spacing,
                "periodic": ax.periodic,
                "collar": ax.collar,
                "timelike": ax.timelike,
            }
            for ax in K.axes
        ],
        "num_cells": list(K.num_cells),
    }
    if K.punctures:
        d["punctures"] = [[list(r) for r in box] for box in K.punctures]
    return d


def grid_from_dict(d: dict) -> CellComplex:
    axes = [
        Axis(
            a["cells"],
            a.get("spacing", 1.0),
            a.get("periodic", False),
            a.get("collar", 0),
            a.get("timelike", False),
        )
        for a in d["axes"]
    ]
    punctures = [tuple(tuple(r) for r in box) for box in d.get("punctures", [])]
    return build_grid(axes, punctures)
