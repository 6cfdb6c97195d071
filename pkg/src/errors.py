"""Exception hierarchy shared by the numerical modules and the CLI."""


class WienerHopfError(Exception):
    """Base class for every failure raised by this package."""


class DomainError(WienerHopfError, ValueError):
    """Input outside the domain of an operation (bad model, bad argument)."""


class PoleError(DomainError):
    """Argument on (or within the guard distance of) a pole lattice point."""


class RegimeError(DomainError):
    """No asymptotic root expansion is available for this parameter regime."""


class ConvergenceError(WienerHopfError):
    """An iteration or series exceeded its cap without meeting tolerance.

    Attributes:
        index: Root index (or term index) that failed, if known
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class QuadratureError(WienerHopfError):
    """Adaptive quadrature did not reach its accuracy target."""


class CollisionError(WienerHopfError):
    """Two continued root paths came closer than the collision tolerance."""


class StiffnessError(WienerHopfError):
    """The path integrator could not take a step (step size underflow)."""


class AccuracyError(WienerHopfError):
    """A computed error estimate exceeds the requested tolerance."""


class TruncationError(WienerHopfError):
    """An oscillatory integrand has not decayed by the truncation point."""
