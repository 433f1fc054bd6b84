"""Exception hierarchy shared by all bessplan modules."""

from __future__ import annotations


class BessplanError(Exception):
    """Base class for all package errors."""


class StructuralError(BessplanError):
    """Network data is structurally unusable (disconnected graph, zero impedance, ...)."""


class ConvergenceError(BessplanError):
    """Iterative load flow failed to converge."""

    def __init__(self, message: str, mismatch: float | None = None, hour: int | None = None):
        super().__init__(message)
        self.mismatch = mismatch
        self.hour = hour


class SingularJacobianError(BessplanError):
    """Load-flow Jacobian is numerically singular at the operating point."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class DataError(BessplanError):
    """Time-series or network file content violates the declared schema."""


class ProblemError(BessplanError):
    """Inconsistent inputs while building an optimization problem."""


class SolverError(BessplanError):
    """A conic solver back-end failed outright."""


class ConfigError(BessplanError):
    """Run configuration is invalid."""
