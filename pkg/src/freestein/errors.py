"""Exception taxonomy shared across the package."""


class FreesteinError(Exception):
    """Base class for all package errors."""


class DimensionError(FreesteinError, ValueError):
    """Generator counts, tensor orders, or shapes do not match."""


class DomainError(FreesteinError, ValueError):
    """A numeric argument is outside its mathematical domain."""


class PreconditionError(FreesteinError, ValueError):
    """A documented operation precondition is violated."""


class TruncationError(FreesteinError, RuntimeError):
    """A trace or cumulant sequence is too short for the requested degree."""


class ConvergenceError(FreesteinError, RuntimeError):
    """An iterative scheme exhausted its budget without meeting tolerance."""


class NumericError(FreesteinError, RuntimeError):
    """A numeric routine produced an unusable result (NaN, divergence)."""


class SchemaError(FreesteinError, ValueError):
    """An input file does not match its documented schema."""
