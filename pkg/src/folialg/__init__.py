"""Exact computations with infinitesimal foliations of Euclidean space.

Foliations are given by separating sets of basic polynomials plus a leaf
tangent oracle.  The package builds Clifford systems and diagonal models,
computes basic polynomial spaces degree by degree, classifies the Jordan
algebra of degree-two basic polynomials, solves for foliated linear maps
and produces foliated symmetries.
"""

from .core import Matrix, cayley_orthogonal, kernel_basis, kron, rref, symmetric_eigensplit
from .polyring import Polynomial, pullback, quad_form, transnormal_product
from .jordan import JordanAlgebra, SimpleFactor, close, decompose, idempotent_from_subspace, subspace_from_idempotent
from .clifford import CliffordSystem, build, psi, slice_point, verify_relations
from .models import (FoliationModel, clifford_model, composed_model, custom_model, diagonal_model, parse_model,
                     product_model, scale_map, so_model)
from .basicpoly import basic_space, f2, fft_check, trivial_factors
from .homsolver import hom_equations, is_foliated
from .symmetry import moduli_report, orthogonal_hessians, transitivity_witness, verify_foliated_symmetries

__version__ = "0.1.0"

__all__ = [
    "Matrix", "cayley_orthogonal", "kernel_basis", "kron", "rref", "symmetric_eigensplit", "Polynomial", "pullback",
    "quad_form", "transnormal_product", "JordanAlgebra", "SimpleFactor", "close", "decompose",
    "idempotent_from_subspace", "subspace_from_idempotent", "CliffordSystem", "build", "psi", "slice_point",
    "verify_relations", "FoliationModel", "clifford_model", "composed_model", "custom_model", "diagonal_model",
    "parse_model", "product_model", "scale_map", "so_model", "basic_space", "f2", "fft_check", "trivial_factors",
    "hom_equations", "is_foliated", "moduli_report", "orthogonal_hessians", "transitivity_witness",
    "verify_foliated_symmetries",
]
