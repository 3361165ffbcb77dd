"""Finite-support computations in Lipschitz-free spaces over finite metric spaces."""

from .errors import (
    ContradictionDiagnostic,
    DegenerateMoleculeError,
    DisconnectedError,
    LipfreeError,
    LipschitzViolation,
    PreconditionError,
    ResolutionError,
    StructureError,
    VerificationError,
)
from .free_space import FreeElement, MolecularDecomposition, Molecule, decompose, lp_norm, norm, pairing
from .lip_func import LipFunction, lip_constant, mcshane_extend, mcshane_extend_lower
from .metric_core import FiniteMetricSpace, MetricGraph, build_ladder, validate_metric

__version__ = "0.1.0"

__all__ = [
    "ContradictionDiagnostic", "DegenerateMoleculeError", "DisconnectedError", "LipfreeError",
    "LipschitzViolation", "PreconditionError", "ResolutionError", "StructureError",
    "VerificationError", "FreeElement", "MolecularDecomposition", "Molecule", "decompose",
    "lp_norm", "norm", "pairing", "LipFunction", "lip_constant", "mcshane_extend",
    "mcshane_extend_lower", "FiniteMetricSpace", "MetricGraph", "build_ladder", "validate_metric",
]
