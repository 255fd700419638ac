"""Exception types raised across the package."""


class BCSCloneError(Exception):
    """Base class for all package errors."""


class TruncationError(BCSCloneError):
    """The retained Fock levels do not hold the state or operator to tolerance."""


class DimensionMismatch(BCSCloneError, ValueError):
    pass


class NonPhysical(BCSCloneError, ValueError):
    """A density operator fails Hermiticity, trace or positivity checks."""


class NonPhysicalCovariance(NonPhysical):
    """A covariance matrix violates the uncertainty relation."""


class DegenerateBasis(BCSCloneError, ValueError):
    """The qubit basis of the alphabet is singular (alpha too close to zero)."""


class ConvergenceError(BCSCloneError):
    pass


class MixedStateUnsupported(BCSCloneError, ValueError):
    pass


class GridTooSmall(BCSCloneError, ValueError):
    pass


class GridMismatch(BCSCloneError, ValueError):
    pass


class ConfigError(BCSCloneError, ValueError):
    pass
