"""Exception types shared across the package."""


class OptimError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OptimError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CurvatureError(OptimError):
    """Positive curvature was required but not observed.

    Raised when s'y <= 0, d'Gd <= 0, or rho = g'Hg <= 0. With a strictly
    convex objective these can only happen through numerical breakdown,
    so callers treat this as a hard diagnostic rather than clamping.
    """


class NumericalError(OptimError):
    """A linear-algebra operation failed (e.g. non-SPD factorization)."""


class LineSearchError(OptimError):
    """No step satisfying the Armijo condition was found within budget."""


class UnsupportedOperationError(OptimError):
    """The oracle or trace does not support the requested operation."""


class ParseError(OptimError, ValueError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
