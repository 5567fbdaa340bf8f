"""Numerical toolkit for bipartite Gaussian boson sampling."""

from .errors import (
    BipgbsError,
    ConvergenceError,
    IllConditionedError,
    InputError,
    InvalidSingularValue,
    InvalidStateError,
    NumericalError,
    OutsideValidityRegion,
)
from .matrix_core import RngStream, SvdResult, permanent, svd

__version__ = "0.1.0"

__all__ = [
    "BipgbsError",
    "ConvergenceError",
    "IllConditionedError",
    "InputError",
    "InvalidSingularValue",
    "InvalidStateError",
    "NumericalError",
    "OutsideValidityRegion",
    "RngStream",
    "SvdResult",
    "permanent",
    "svd",
    "__version__",
]
