"""Exception types raised across the library."""


class ChansimError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ChansimError):
    pass


class NotHermitian(ChansimError):
    pass


class NotPSD(ChansimError):
    pass


class NoConvergence(ChansimError):
    pass


class NotTracePreserving(ChansimError):
    pass


class NotSubnormalized(ChansimError):
    pass


class CoefficientNotPSD(ChansimError):
    pass


class NotCorrectable(ChansimError):
    pass


class NotIdempotent(ChansimError):
    pass


class InvalidPovm(ChansimError):
    pass


class DeskScaleExceeded(ChansimError):
    pass
