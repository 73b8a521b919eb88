"""Fast semi-implicit solvers for nonlinear fractional differential equations."""

from .fracweights import (
    CorrectionSet,
    Family,
    GeneratingFunction,
    IllConditionedError,
    UnsupportedOrderError,
    WeightTable,
    build_correction_set,
    convolution_weights,
    correction_weights_E,
    discrete_caputo_direct,
    gngf_coefficients,
    perturbation,
    starting_weights,
)

__version__ = "0.1.0"

__all__ = [
    "CorrectionSet",
    "Family",
    "GeneratingFunction",
    "IllConditionedError",
    "UnsupportedOrderError",
    "WeightTable",
    "build_correction_set",
    "convolution_weights",
    "correction_weights_E",
    "discrete_caputo_direct",
    "gngf_coefficients",
    "perturbation",
    "starting_weights",
]
