"""Diagonalization of quadratic boson, fermion and coordinate-momentum forms."""

from .bv import (
    Diagonalization,
    Mode,
    VerificationReport,
    diagonalize_boson,
    diagonalize_fermion,
    diagonalize_normal,
    diagonalize_pairing,
    particle_hole,
    verify,
)
from .core import (
    BosonForm,
    CoefficientMatrix,
    CoordForm,
    DegenerateMetric,
    FermionForm,
    IndexOutOfRange,
    Metric,
    MissingParameter,
    NotDiagonalizable,
    NotPositiveDefinite,
    PairingFailure,
    PairingForm,
    QuadiagError,
    SizeMismatch,
    SolverFailure,
    StructuralViolation,
    Tolerances,
    UnknownModel,
    assemble_coefficient_matrix,
    metric_for,
)
from .corpus import FIXTURES, ModelSpec, generate, run_fixture
from .dirac import DiracResult, diagonalize_coord, kv_fast_path
from .dynamics import DynamicMatrix, build_dynamic_matrix, dynamic_matrix, heisenberg_apply
from .pipeline import diagonalize
from .spectral import Classification, classify

__all__ = [
    "BosonForm", "FermionForm", "PairingForm", "CoordForm", "Metric", "CoefficientMatrix", "Tolerances",
    "DynamicMatrix", "Classification", "Diagonalization", "DiracResult", "Mode", "VerificationReport",
    "ModelSpec", "FIXTURES",
    "assemble_coefficient_matrix", "metric_for", "build_dynamic_matrix", "dynamic_matrix", "heisenberg_apply",
    "classify", "diagonalize", "diagonalize_boson", "diagonalize_fermion", "diagonalize_normal",
    "diagonalize_pairing", "diagonalize_coord", "kv_fast_path", "particle_hole", "verify",
    "generate", "run_fixture",
    "QuadiagError", "StructuralViolation", "SizeMismatch", "IndexOutOfRange", "SolverFailure",
    "PairingFailure", "DegenerateMetric", "NotPositiveDefinite", "NotDiagonalizable", "UnknownModel",
    "MissingParameter",
]
