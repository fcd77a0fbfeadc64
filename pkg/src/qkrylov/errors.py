"""Exception types raised across the package."""


class QKrylovError(Exception):
    """Base class for all package errors."""


class PreconditionError(QKrylovError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(QKrylovError):
    """The requested model is too large for dense representation."""


class DegenerateSpectrumError(PreconditionError):
    """The spectrum has zero range, so quantities such as dt are undefined."""


class AllRemovedError(QKrylovError):
    """Thresholding removed every direction of the overlap matrix."""


class InternalConsistencyError(QKrylovError):
    """A numerical invariant that holds by construction was found violated."""


class InfeasibleError(QKrylovError):
    """No admissible parameter choice satisfies the bound's assumptions."""


class ConfigError(QKrylovError, ValueError):
    """A sweep configuration is malformed."""
