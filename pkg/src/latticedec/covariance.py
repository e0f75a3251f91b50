"""Axis-aligned sublattice embeddings and the morphisms they induce.

An embedding maps a product lattice into a larger one axis by axis: each
source axis lands in a target axis of the same spacing, shifted by an
integer offset; an open source axis may close up into a periodic target
axis, and punctures of the source may be filled in the target.  Cochains
push forward by extension with zero.  Because incidence numbers, volumes
and (away from the collar) Hodge weights agree on the image, the
push-forward commutes exactly with d on off-collar cochains and with
delta on core-supported ones, which is what makes the induced maps of
observable algebras well defined.

The interesting content is in the kernels of those induced maps: a
degenerate (bracket-null) class on the source can become trivial in a
target that fills its puncture, while a periodic closure can keep it
alive.  `morphism_kernel` measures this with exact integer rank
computations on the flux representatives, and `center_quotient_obstruction`
shows the quantized counterpart: a pushed central generator that stops
commuting with the target algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import _exact
from .calculus import (Cochain, codifferential_matrix, d_columns_exact,
                       d_matrix, pair)
from .cauchy import green_causal
from .lattice import BIG_MARGIN, CORE_MARGIN, Axis, CellComplex, SpacetimeLattice
from .peierls import BracketMatrix, Observable, bracket_matrix, canonical_basis


# ---------------------------------------------------------------------------
# the embedding type


def _axis_positions(src: Axis, tgt: Axis, off: int, kind: int) -> np.ndarray:
    """Target position of every source position of the given kind (0 =
    vertex, 1 = edge), or raise if the axes are not compatible."""
    if src.spacing != tgt.spacing:
        raise ValueError("axis spacings differ")
    if src.timelike != tgt.timelike:
        raise ValueError("timelike axes must map to timelike axes")
    if src.timelike and off != 0:
        raise ValueError("time offsets would break the slice labelling")
    idx = np.arange(src.n_positions(kind))
    if tgt.periodic:
        if src.periodic:
            if src.n_cells != tgt.n_cells:
                raise ValueError("periodic axes must have equal circumference")
        elif src.n_vertices > tgt.n_cells:
            raise ValueError("periodic closure needs a strictly longer circle")
        return (idx + off) % tgt.n_positions(kind)
    if src.periodic:
        raise ValueError("a periodic axis cannot embed in an open one")
    if off < 0 or off + src.n_cells > tgt.n_cells:
        raise ValueError("offset pushes the axis out of the target")
    return idx + off


class MeshEmbedding:
    """Injective cell map between product lattices, one offset per axis.

    The constructor verifies everything the induced morphisms rely on:
    every kept source cell maps to a kept target cell of the same
    dimension and volume, incidence signs are preserved (same axis order
    and orientation conventions on both sides), Hodge weights agree on the
    image of the off-collar region, and CORE source cells land off the
    target collar.  `causally_convex` is always true for this family: on
    ultrastatic product lattices an axis-aligned inclusion preserves the
    light cones cell by cell.
    """

    def __init__(self, source: CellComplex, target: CellComplex, offsets):
        if source.n != target.n:
            raise ValueError("source and target must share the axis count")
        offsets = tuple(int(o) for o in offsets)
        if len(offsets) != source.n:
            raise ValueError("need one offset per axis")
        self.source = source
        self.target = target
        self.offsets = offsets
        self.causally_convex = True
        self._maps = {}
        for p in range(source.n + 1):
            self._maps[p] = self._build_map(p)
        self._check_weights()
        self._check_regions()

    def _build_map(self, p: int) -> np.ndarray:
        out = np.full(self.source.num(p), -1, dtype=np.int64)
        for T in self.source.types_by_degree[p]:
            blk = self.source.blocks[T]
            tgt_blk = self.target.blocks[T]
            pos = np.indices(blk.shape)
            coords = [
                _axis_positions(self.source.axes[a], self.target.axes[a],
                                self.offsets[a], T[a])[pos[a]]
                for a in range(self.source.n)
            ]
            tgt = tgt_blk.ids[tuple(coords)]
            src = blk.ids
            kept = blk.kept
            if (tgt[kept] < 0).any():
                raise ValueError("a source cell has no kept image "
                                 "(target punctures must be a subset)")
            out[src[kept]] = tgt[kept]
        return out

    def _check_weights(self):
        # volumes agree everywhere (equal spacings); dual volumes must agree
        # on the image of the off-collar region, where delta is transported
        for p in range(self.source.n + 1):
            m = self._maps[p]
            off = self.source.margin(p) >= 1
            sv, tv = self.source.volume(p), self.target.volume(p)
            if not np.allclose(sv, tv[m], rtol=1e-14, atol=0):
                raise ValueError("cell volumes differ on the image")
            sd, td = self.source.dual_volume(p), self.target.dual_volume(p)
            if off.any() and not np.allclose(sd[off], td[m[off]], rtol=1e-14, atol=0):
                raise ValueError("Hodge weights differ on the off-collar image")

    def _check_regions(self):
        for p in range(self.source.n + 1):
            ms = self.source.margin(p)
            mt = self.target.margin(p)[self._maps[p]]
            if (mt[ms >= CORE_MARGIN] < 1).any():
                raise ValueError("a CORE source cell maps onto the target collar")
            finite = ms < BIG_MARGIN
            if (mt[finite] < ms[finite]).any():
                raise ValueError("margins decrease across the embedding")

    # -- the maps ------------------------------------------------------------

    def cell_map(self, p: int) -> np.ndarray:
        """Target cell id of every source p-cell."""
        return self._maps[p]

    def pushforward(self, alpha: Cochain, min_margin: int = CORE_MARGIN,
                    tol: float = 1e-12) -> Cochain:
        """Extension of alpha by zero.  The support must sit at margin >=
        min_margin (default CORE); off-collar support already guarantees
        that d commutes with the push-forward exactly, core support also
        transports delta.  Entries below tol (relative) at shallow margins
        are treated as roundoff and dropped."""
        if alpha.complex is not self.source:
            raise ValueError("cochain lives on the wrong complex")
        p = alpha.degree
        vals = alpha.values
        shallow = self.source.margin(p) < min_margin
        if shallow.any():
            worst = float(np.abs(vals[shallow]).max())
            scale = max(float(np.abs(vals).max()), 1.0)
            if worst > tol * scale:
                raise ValueError(
                    "support reaches margin < %d (max |value| %.3g there)"
                    % (min_margin, worst))
            if worst > 0.0:
                vals = np.where(shallow, 0.0, vals)
        out = np.zeros(self.target.num(p))
        out[self._maps[p]] = vals
        return Cochain(self.target, p, out)

    def push_observable(self, obs: Observable, min_margin: int = 1,
                        tol: float = None) -> Observable:
        """Observables stay observables: off-collar support maps off the
        target collar, and co-closedness transports because the weights
        agree on the off-collar image (constructor invariant)."""
        a = self.pushforward(obs.cochain, min_margin=min_margin)
        return Observable(a, tol=obs.tol if tol is None else tol)

    def push_exact(self, col: dict, p: int) -> dict:
        """Push a sparse exact column (row -> Fraction) of p-cell values."""
        m = self._maps[p]
        return {int(m[r]): v for r, v in col.items()}

    def restrict(self, beta: Cochain) -> Cochain:
        """Pull target values back along the cell map (left inverse of the
        push-forward: restrict(pushforward(a)) == a exactly)."""
        if beta.complex is not self.target:
            raise ValueError("cochain lives on the wrong complex")
        return Cochain(self.source, beta.degree, beta.values[self._maps[beta.degree]])

    def compose(self, inner: "MeshEmbedding") -> "MeshEmbedding":
        """self o inner.  The composite is again axis-aligned; its cell maps
        are checked against the composition cell by cell."""
        if inner.target is not self.source:
            raise ValueError("embeddings do not chain")
        offs = []
        for a in range(inner.source.n):
            o = inner.offsets[a] + self.offsets[a]
            if self.target.axes[a].periodic:
                o %= self.target.axes[a].n_cells
            offs.append(o)
        out = MeshEmbedding(inner.source, self.target, offs)
        for p in range(out.source.n + 1):
            if not np.array_equal(out.cell_map(p), self._maps[p][inner.cell_map(p)]):
                raise AssertionError("composite cell map mismatch")
        return out


def identity_embedding(K: CellComplex) -> MeshEmbedding:
    return MeshEmbedding(K, K, (0,) * K.n)


# ---------------------------------------------------------------------------
# flux representatives: the degenerate classes at the d-level

# The degenerate classes are delta(X) with X an off-collar element of
# d(temporally compact); working with X itself ("flux" representatives)
# keeps everything in integer arithmetic, and the push-forward commutes
# with d exactly on off-collar support, so triviality questions transport
# cleanly: a class dies in the target iff its flux pushes into
# d(off-collar target cochains).


@dataclass
class FluxClasses:
    degree: int          # p: the observables are p-cochains, fluxes are (p+1)
    dim: int
    exact: list          # sparse Fraction columns over (p+1)-cells
    vectors: np.ndarray  # the same columns as floats


def _offcollar_d_columns(K: CellComplex, p: int) -> list:
    cols = d_columns_exact(K, p)
    return _exact.select_columns(cols, np.flatnonzero(K.margin(p) >= 1))


def flux_classes(M: SpacetimeLattice, p: int) -> FluxClasses:
    """Exact representatives X_k in (off-collar) ∩ d(temporally compact),
    spanning the quotient by d(off-collar).  Their count equals the
    degeneracy dimension of the lattice."""
    cols = d_columns_exact(M, p)
    tc = np.flatnonzero(M.time_margin(p) >= 1)
    Dtc = _exact.select_columns(cols, tc)
    collar_hi = M.margin(p + 1) == 0
    constraint = _exact.restrict_rows(Dtc, collar_hi)
    den = _offcollar_d_columns(M, p)
    dim = _exact.stacked_quotient_dim(den, Dtc, constraint)
    reps = []
    if dim:
        kern = _exact.nullspace(constraint)
        cand = _exact.compose(Dtc, kern)
        # float screen, then one exact rank certificate for the chosen set
        n_hi = M.num(p + 1)
        den_dense = _exact.dense_from_columns(den, n_hi)
        q = la.orth(den_dense) if den_dense.size else np.zeros((n_hi, 0))
        r_den = _exact.batch_rank(den)
        for c in cand:
            v = np.zeros(n_hi)
            for r, val in c.items():
                v[r] = float(val)
            resid = v - q @ (q.T @ v)
            if np.linalg.norm(resid) <= 1e-8 * max(np.linalg.norm(v), 1.0):
                continue
            if _exact.batch_rank(den + reps + [c]) > r_den + len(reps):
                reps.append(c)
            if len(reps) == dim:
                break
        if len(reps) != dim:
            raise AssertionError("failed to certify a full set of flux classes")
    vecs = _exact.dense_from_columns(reps, M.num(p + 1)) if reps else \
        np.zeros((M.num(p + 1), 0))
    return FluxClasses(p, dim, reps, vecs)


# ---------------------------------------------------------------------------
# degenerate observables: collar-free representatives of the flux classes


def _dd_dense(T: SpacetimeLattice, p: int):
    off = np.flatnonzero(T.margin(p) >= 1)
    dd = (codifferential_matrix(T, p + 1) @ d_matrix(T, p)).tocsc()
    return dd[:, off].toarray(), off


def degenerate_observable(M: SpacetimeLattice, p: int, X: np.ndarray,
                          tol: float = 1e-10) -> Observable:
    """Observable representing the class of delta(X) for a flux element X.

    delta(X) is co-closed and bracket-null, but its support can graze the
    collar; a trivial shift (delta d of an off-collar cochain) removes the
    collar values exactly, leaving a valid Observable in the same class."""
    dX = codifferential_matrix(M, p + 1) @ X
    collar = np.flatnonzero(M.margin(p) == 0)
    if collar.size:
        dd = (codifferential_matrix(M, p + 1) @ d_matrix(M, p)).tocsc()
        off = np.flatnonzero(M.margin(p) >= 1)
        block = dd[collar][:, off].toarray()
        g, *_ = la.lstsq(block, -dX[collar], lapack_driver="gelsd")[:1]
        fix = np.zeros(M.num(p))
        fix[off] = g
        dX = dX + dd.dot(fix)
        worst = float(np.abs(dX[collar]).max())
        if worst > tol * max(float(np.abs(dX).max()), 1.0):
            raise AssertionError(
                "no collar-free representative found (residual %.3g)" % worst)
    return Observable(Cochain(M, p, dX), tol=tol * max(float(np.abs(dX).max()), 1.0))


# ---------------------------------------------------------------------------
# kernels of the induced observable-algebra morphisms


@dataclass
class MorphismKernel:
    degree: int
    dim: int                   # exact: number of source classes that die
    dies: list                 # one bool per source flux class
    members: list              # Observables representing the dying classes
    constants: list            # affine constants (current != 0), else zeros
    residuals: np.ndarray      # pushed-representative distance from the
                               # target trivial shifts, one per flux class
    source_dim: int            # number of degenerate source classes


def morphism_kernel(psi: MeshEmbedding, p: int, current: Cochain = None,
                    fluxes: FluxClasses = None,
                    tol: float = 1e-8) -> MorphismKernel:
    """Source observable classes killed by the embedding.

    A class dies when its push-forward becomes a trivial shift on the
    target.  The count is exact: flux representatives are pushed forward
    (integer arithmetic, d commutes with the push on off-collar support)
    and tested for membership in d(off-collar) of the target by rational
    rank computations.  The members returned for the dying classes are
    collar-free bracket-null Observables, so the kernel sits inside the
    degenerate span by construction; a float least-squares solve of the
    pushed member against the target trivial shifts cross-checks each
    exact verdict and supplies the affine constant when a current is set.
    """
    M, T = psi.source, psi.target
    if fluxes is None:
        fluxes = flux_classes(M, p)
    den_t = _offcollar_d_columns(T, p)
    r_den = _exact.batch_rank(den_t)
    pushed = [psi.push_exact(c, p + 1) for c in fluxes.exact]
    dies = [_exact.batch_rank(den_t + [c]) == r_den for c in pushed]
    dim = sum(dies)
    # rank of the whole pushed batch certifies that the surviving classes
    # stay independent, not just individually nontrivial
    r_all = _exact.batch_rank(den_t + pushed)
    if r_all - r_den != fluxes.dim - dim:
        raise AssertionError("flux classes die dependently; refine the test")

    dd_t, off_t = _dd_dense(T, p)
    members, constants, residuals = [], [], []
    for k in range(fluxes.dim):
        rep = degenerate_observable(M, p, fluxes.vectors[:, k])
        v = psi.pushforward(rep.cochain, min_margin=1).values
        beta, *_ = la.lstsq(dd_t, v, lapack_driver="gelsd")[:1]
        resid = float(np.linalg.norm(dd_t @ beta - v)
                      / max(np.linalg.norm(v), 1.0))
        residuals.append(resid)
        if (resid <= tol) != dies[k]:
            raise AssertionError(
                "float membership (residual %.3g) disagrees with the exact "
                "verdict for flux class %d" % (resid, k))
        if dies[k]:
            members.append(rep)
            if current is not None:
                gamma = np.zeros(T.num(p))
                gamma[off_t] = beta
                constants.append(-pair(current, Cochain(T, p, gamma)))
            else:
                constants.append(0.0)
    return MorphismKernel(p, dim, dies, members, constants,
                          np.asarray(residuals), fluxes.dim)


# ---------------------------------------------------------------------------
# propagator compatibility: the executable face of general covariance


def propagator_compat(psi: MeshEmbedding, alpha: Cochain, beta: Cochain,
                      min_margin: int = CORE_MARGIN):
    """Both sides of pair(alpha, G beta) = pair(psi alpha, G~ psi beta).

    They agree (up to marching roundoff) whenever the causal development of
    the supports stays inside the region where source and target lattices
    coincide: the solves see identical stencils there, and the causal
    propagator has finite propagation speed, one cell per step.
    """
    if isinstance(alpha, Observable):
        alpha = alpha.cochain
    if isinstance(beta, Observable):
        beta = beta.cochain
    lhs = pair(alpha, green_causal(beta))
    pa = psi.pushforward(alpha, min_margin=min_margin)
    pb = psi.pushforward(beta, min_margin=min_margin)
    rhs = pair(pa, green_causal(pb))
    return lhs, rhs


# ---------------------------------------------------------------------------
# the center-quotient obstruction


@dataclass
class CentralitySweep:
    max_commutator: float   # max |{pushed, target generator}|
    pi_norm: float          # spectral norm of the target bracket matrix
    trivial_residual: float # distance of the push from the trivial shifts
    is_central: bool
    is_trivial: bool


def centrality_sweep(psi: MeshEmbedding, nu: Observable,
                     target_bracket: BracketMatrix = None,
                     central_tol: float = 1e-9, trivial_tol: float = 1e-8,
                     workers: int = 1) -> CentralitySweep:
    """Push a (central) source observable and sweep its bracket against the
    target generators.  One causal solve; the commutators are pairings."""
    T = psi.target
    p = nu.degree
    if target_bracket is None:
        cb = canonical_basis(T, p)
        target_bracket = bracket_matrix(cb.observables(), workers=workers)
    pushed = psi.push_observable(nu, tol=None)
    g = green_causal(pushed.cochain)
    comms = [pair(o.cochain, g) for o in target_bracket.observables]
    worst = max(abs(c) for c in comms) if comms else 0.0
    pi_norm = float(la.svd(target_bracket.matrix, compute_uv=False)[0]) \
        if target_bracket.matrix.size else 0.0
    dd_t, _ = _dd_dense(T, p)
    v = pushed.cochain.values
    beta, *_ = la.lstsq(dd_t, v, lapack_driver="gelsd")[:1]
    resid = float(np.linalg.norm(dd_t @ beta - v) / max(np.linalg.norm(v), 1.0))
    return CentralitySweep(worst, pi_norm, resid,
                           worst <= central_tol * max(pi_norm, 1.0),
                           resid <= trivial_tol)


@dataclass
class ObstructionReport:
    """Three fates of a central (bracket-null) generator under push-forward:
    it can stay central (identity), die into a multiple of the unit
    (puncture filled), or stop being central altogether (periodic closure:
    the class survives but its bracket-nullity does not transport)."""

    identity: CentralitySweep
    filled: CentralitySweep
    closed: CentralitySweep

    @property
    def reproduced(self) -> bool:
        return (self.identity.is_central
                and self.filled.is_trivial
                and self.closed.max_commutator > 0.1 * self.closed.pi_norm)


def degenerate_generator(M: SpacetimeLattice, p: int,
                         fluxes: FluxClasses = None) -> Observable:
    """The central generator of a lattice with one degenerate class."""
    if fluxes is None:
        fluxes = flux_classes(M, p)
    if fluxes.dim != 1:
        raise AssertionError("expected one degenerate class, found %d"
                             % fluxes.dim)
    return degenerate_observable(M, p, fluxes.vectors[:, 0])


def center_quotient_obstruction(filled: MeshEmbedding, closed: MeshEmbedding,
                                p: int = 1, workers: int = 1) -> ObstructionReport:
    """Run the sweep for the two topology-changing embeddings of a lattice
    with a one-dimensional center (plus the identity as control).  `filled`
    must fill the source puncture, `closed` must close it up periodically;
    both sources need exactly one degenerate class at degree p."""
    rep = {}
    for name, psi in (("filled", filled), ("closed", closed)):
        nu = degenerate_generator(psi.source, p)
        if name == "closed":
            # control on the closed-branch source: its bracket matrix has
            # full-size entries, so centrality there is a nontrivial check
            ident = identity_embedding(psi.source)
            rep["identity"] = centrality_sweep(ident, nu, workers=workers)
        rep[name] = centrality_sweep(psi, nu, workers=workers)
    return ObstructionReport(rep["identity"], rep["filled"], rep["closed"])
