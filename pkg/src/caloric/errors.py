"""Exception types shared across the package."""


class CaloricError(Exception):
    """Base class for all package errors."""


class InputError(CaloricError, ValueError):
    """Malformed input: dimension mismatch, bad shape, out-of-range parameter."""


class DegenerateError(CaloricError, ValueError):
    """Input is degenerate, e.g. vanishing mass or a rank-deficient point set."""


class UnsupportedInputError(CaloricError, ValueError):
    """Operation is not defined for this kind of input (e.g. non-caloric)."""


class PreconditionError(CaloricError, ValueError):
    """A stated hypothesis of the operation does not hold."""


class NumericError(CaloricError, ArithmeticError):
    """Non-finite values or a failed numerical routine."""


class ConfigError(CaloricError, ValueError):
    """Invalid or incomplete experiment configuration."""


class NonGraphicalError(PreconditionError):
    """A point set does not project injectively onto a plane."""

    def __init__(self, message: str, witnesses=()):
        super().__init__(message)
        self.witnesses = list(witnesses)


class CoverageError(DegenerateError):
    """A region that must be covered (or fitted) has no samples."""
