"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical procedure failed in a way the caller must handle."""


class PowerIterationError(NumericalError):
    """Power iteration did not converge within its iteration cap."""


class ReferenceSolveError(NumericalError):
    """The reference solver could not reach the requested tolerance."""


class ZeroResidualError(NumericalError):
    """A step size was requested at an already-converged iterate."""


class OperatorNotSPDError(NumericalError):
    """An operator assumed symmetric positive definite turned out not to be."""


class DivisionBarrierError(NumericalError):
    """A zero singular value was retained with a nonzero filter weight."""


class SingularMidpointSystemError(NumericalError):
    """The implicit midpoint system was singular at some midpoint time."""


class SingularMatrixError(NumericalError):
    """A matrix required to be nonsingular was singular."""
