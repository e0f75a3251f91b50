"""Lattice exterior calculus for p-form electrodynamics on finite spacetimes."""

from .lattice import (
    Axis,
    CellComplex,
    SpacetimeLattice,
    build_grid,
    product,
    spacetime,
)
from .calculus import Cochain, HodgeWeights, box, codifferential, d, pair

__all__ = [
    "Axis",
    "CellComplex",
    "SpacetimeLattice",
    "build_grid",
    "product",
    "spacetime",
    "Cochain",
    "HodgeWeights",
    "box",
    "codifferential",
    "d",
    "pair",
]
