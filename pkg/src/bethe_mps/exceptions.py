"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command-line
front end can translate module failures without a lookup table.
"""

from __future__ import annotations


class BetheMPSError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 4


class ConfigError(BetheMPSError):
    """Job configuration could not be parsed or is inconsistent."""

    exit_code = 2

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class SizeLimitError(BetheMPSError):
    exit_code = 5


class PreconditionError(BetheMPSError, ValueError):
    """Input violates a documented precondition."""


class UnsupportedParametrizationError(PreconditionError):
    pass


class DegenerateRapidityError(PreconditionError):
    """A rapidity hits a pole guard or two rapidities coincide."""


class ContractViolation(PreconditionError):
    pass


class SingularMatrixError(BetheMPSError):
    pass


class ConvergenceError(BetheMPSError):
    exit_code = 3


class SolverError(ConvergenceError):
    """Newton iteration hit a singular Jacobian."""


class DomainEscapeError(ConvergenceError):
    """Newton iterate left the pole-guarded domain."""

    def __init__(self, message: str, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class NullStateError(BetheMPSError):
    """A candidate state vector is identically zero."""


class OracleError(BetheMPSError):
    pass
