"""Exception types shared across the package."""


class DyntrivError(Exception):
    """Base class for all package errors."""


class ShapeError(DyntrivError, ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(DyntrivError, ArithmeticError):
    """A factorization met a pivot that is zero to working precision."""


class StructureError(DyntrivError, ValueError):
    """Input lacks the structure an operation requires (symmetry, skewness, ...)."""


class TangencyError(DyntrivError, ValueError):
    """An ambient matrix is not a tangent vector at the given base point."""


class DomainError(DyntrivError, ArithmeticError):
    """A retraction was evaluated outside the set where it is defined."""


class ConfigError(DyntrivError, ValueError):
    """Unsupported or inconsistent configuration."""


class NumericalAbort(DyntrivError, ArithmeticError):
    """The optimization produced a non-finite value and was stopped.

    ``trace`` holds the records collected up to the failure.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)
