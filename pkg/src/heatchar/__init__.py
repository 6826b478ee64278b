"""Equivariant heat-trace coefficients at fixed points of isometries."""

from .coefficients import b0, b1, correction_C, heat_coefficients, leibniz_box_trace
from .errors import (ArgumentError, ConfigError, FitError, HeatcharError, ModelError,
                     ResourceError, ValidationError)
from .tensors import CurvatureTensor, FixedPointGerm, NormalIsometry, TorsionData

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "ConfigError", "CurvatureTensor", "FitError", "FixedPointGerm",
    "HeatcharError", "ModelError", "NormalIsometry", "ResourceError", "TorsionData",
    "ValidationError", "b0", "b1", "correction_C", "heat_coefficients", "leibniz_box_trace",
]
