"""Exception types shared across the package."""


class ToralTraceError(Exception):
    """Base class for all package errors."""


class IntegerOverflowError(ToralTraceError, OverflowError):
    """A result would not fit in a signed 64-bit integer.

    Attributes
    ----------
    largest_safe : int
        Largest input for which the computation still fits.
    """

    def __init__(self, message, largest_safe):
        super().__init__(message)
        self.largest_safe = largest_safe


class ResourceError(ToralTraceError):
    """A configured size cap (points, matrix size) would be exceeded."""


class QuadratureError(ToralTraceError):
    """Quadrature did not reach the requested tolerance.

    ``where`` names the integral (for example the matrix entry ``(k, l)``).
    """

    def __init__(self, message, where=None, change=None):
        super().__init__(message)
        self.where = where
        self.change = change


class UnsupportedError(ToralTraceError):
    """Operation not available for this measure variant."""


class AuditFailure(ToralTraceError):
    """An assertion-style audit found violations."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []
