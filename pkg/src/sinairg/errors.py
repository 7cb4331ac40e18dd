"""Exception types raised across the package."""


class SinaiError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(SinaiError, ValueError):
    pass


class InsufficientDomain(SinaiError, ValueError):
    """The sampled domain does not contain the extrema needed around 0."""


class InvalidChain(SinaiError, ValueError):
    pass


class WindowExhausted(SinaiError, RuntimeError):
    """A merge needed a neighbor beyond the end of a finite chain."""


class NonMonotoneEvent(SinaiError, RuntimeError):
    """Internal consistency failure of the coarsening engine."""


class UnsupportedMode(SinaiError, ValueError):
    pass


class DomainError(SinaiError, ValueError):
    pass


class TruncationNotConverged(SinaiError, ArithmeticError):
    pass


class InsufficientHits(SinaiError, RuntimeError):
    pass


class EmptySample(SinaiError, ValueError):
    pass
