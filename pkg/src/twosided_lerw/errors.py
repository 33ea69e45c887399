"""Exception hierarchy shared by every module."""


class LerwError(Exception):
    """Base class for all errors raised by this package."""


class NotNeighbor(LerwError, ValueError):
    """Two sites are not lattice nearest neighbours."""


class SelfIntersection(LerwError, ValueError):
    """A walk would visit a vertex twice."""


class NoForwardStep(LerwError, ValueError):
    """The walk has no vertex after the origin."""


class NotLoop(LerwError, ValueError):
    """A walk does not start and end at the same site."""


class InvalidWalk(LerwError, ValueError):
    """Malformed walk (empty, missing origin, bad dimension, ...)."""


class DimensionError(LerwError, ValueError):
    """Operation only defined in a particular lattice dimension."""


class Singular(LerwError, ArithmeticError):
    """A linear system (I - Q) g = b is not uniquely solvable."""


class NotConverged(LerwError):
    """An exhaustion or extrapolation sequence failed its tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateDeterminant(LerwError, ArithmeticError):
    """D^q is numerically zero; its ratio is undefined."""


class InsufficientAcceptance(LerwError):
    """A rejection sampler accepted too few samples."""


class MaxTriesExceeded(LerwError):
    """A conditioned sampler exhausted its trial budget."""

    def __init__(self, message, acceptance_rate=None):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class DivideByZero(LerwError, ZeroDivisionError):
    """A conditional expectation was requested on a null event."""
