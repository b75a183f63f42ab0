"""Trace and observability constants for measures on the flat torus."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AuditFailure,
    IntegerOverflowError,
    QuadratureError,
    ResourceError,
    ToralTraceError,
    UnsupportedError,
)
