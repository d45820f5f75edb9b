"""Matrix-weighted dyadic harmonic analysis on a finite dyadic tree."""
from .bounds import (
    BoundsReport,
    CarlesonSequence,
    bounds_report,
    carleson_constants,
    square_constants,
    testing_ratio,
    weighted_op_norm,
)
from .dyadic import DyadicIndex, HaarSpectrum, VectorField, analyze, synthesize
from .errors import InvalidInputError, MatDyadicError, NotPositiveDefiniteError, NumericalError
from .operators import MultiplierSymbol, apply_multiplier, apply_shift, square_norm_sq
from .weights import WeightField, a2_characteristic, averages_tree, generate

__all__ = [
    "BoundsReport", "CarlesonSequence", "DyadicIndex", "HaarSpectrum", "InvalidInputError",
    "MatDyadicError", "MultiplierSymbol", "NotPositiveDefiniteError", "NumericalError",
    "VectorField", "WeightField", "a2_characteristic", "analyze", "apply_multiplier",
    "apply_shift", "averages_tree", "bounds_report", "carleson_constants", "generate",
    "square_constants", "square_norm_sq", "synthesize", "testing_ratio", "weighted_op_norm",
]
