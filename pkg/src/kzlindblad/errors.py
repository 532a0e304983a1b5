"""Exception types raised across the package."""


class KZLindbladError(Exception):
    """Base class for all package errors."""


class DomainError(KZLindbladError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularPointError(KZLindbladError, ValueError):
    """The Bloch vector vanishes (gapless point) where a gap is required."""


class PreconditionError(KZLindbladError, ValueError):
    """A documented precondition of an operation is violated."""


class StiffnessError(KZLindbladError, RuntimeError):
    """The adaptive integrator could not make progress."""

    def __init__(self, message, t=None, q=None, tau_Q=None):
        super().__init__(message)
        self.t = t
        self.q = q
        self.tau_Q = tau_Q


class ConfigError(KZLindbladError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
