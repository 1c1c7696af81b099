"""Quantitative geometry of caloric functions: frequency, symmetry, strata and necks."""

__version__ = "0.1.0"

from .caloricpoly import CaloricPolynomial, heat_polynomial, spectral_decompose  # noqa: E402
from .errors import (  # noqa: E402
    CaloricError, ConfigError, CoverageError, DegenerateError, InputError, NonGraphicalError, NumericError,
    PreconditionError, UnsupportedInputError,
)
from .frequency import functionals, kalpha_pinching, profile  # noqa: E402
from .spacetime import ParabolicBall, ParabolicPlane, SpaceTimePoint  # noqa: E402

__all__ = [
    "__version__", "CaloricPolynomial", "heat_polynomial", "spectral_decompose", "functionals",
    "profile", "kalpha_pinching", "ParabolicBall", "ParabolicPlane", "SpaceTimePoint", "CaloricError",
    "ConfigError", "CoverageError", "DegenerateError", "InputError", "NonGraphicalError", "NumericError",
    "PreconditionError", "UnsupportedInputError",
]
