"""Numerics for stable self-similar blowup in the SO(5)-equivariant
Yang-Mills heat flow: closed forms, spectra, resolvent bounds and evolution."""

__version__ = "0.1.0"

from .closed_forms import (
    DimensionParams,
    Constants5d,
    ClosedForm,
    weinkove_profile,
    blowup_solution,
    potential_v,
    symmetry_mode,
    second_solution,
    susy_potential,
    nonlinearity_coeffs,
    factorization_ops,
)
from .grids import RadialGrid, RadialField
from .norms import norm1, norm2, norm_H, radial_laplacian, weighted_seminorms, hardy_check

__all__ = [
    "__version__",
    "DimensionParams",
    "Constants5d",
    "ClosedForm",
    "weinkove_profile",
    "blowup_solution",
    "potential_v",
    "symmetry_mode",
    "second_solution",
    "susy_potential",
    "nonlinearity_coeffs",
    "factorization_ops",
    "RadialGrid",
    "RadialField",
    "norm1",
    "norm2",
    "norm_H",
    "radial_laplacian",
    "weighted_seminorms",
    "hardy_check",
]
