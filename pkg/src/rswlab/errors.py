"""Exception types shared by all solver and harness modules."""


class RswError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RswError):
    """A scenario or study configuration is malformed; message names the key."""


class RegimeViolation(RswError):
    """Dimensionless parameters fail the requested asymptotic regime."""


class DomainTooSmall(RswError):
    """Periodic box too short for the requested integration horizon."""


class NonPositiveDepth(RswError):
    """Water depth h = 1 + eps*zeta - beta*b dropped below h_min."""


class NonZeroMean(RswError):
    """Antiderivative requested for a field with non-negligible mean."""


class NonFinite(RswError):
    """A time step produced NaN or Inf values."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (at t={t:g})")
        self.t = t


class EllipticSolveFailure(RswError):
    """The variable-coefficient inertia solve did not reach tolerance."""


class SlowTimeOutOfRange(RswError):
    """Requested slow time lies outside the stored trajectory."""


class NotAnOstrovskySolution(RswError):
    """Snapshots fail the scalar-equation residual check."""
