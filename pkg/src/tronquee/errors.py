"""Exception hierarchy shared by all modules."""


class TronqueeError(Exception):
    """Base class for every error raised by this package."""


class BranchConstraintError(TronqueeError, ValueError):
    """The branch constant A does not satisfy the case's polynomial constraint."""


class DomainError(TronqueeError, ValueError):
    """An argument lies outside the domain of the operation (x = 0, w = 0, bad ray...)."""


class NearSingularError(TronqueeError, ArithmeticError):
    """A matrix or denominator is numerically singular."""


class ResonanceError(TronqueeError, ArithmeticError):
    """A zero pivot was met in a transseries recursion."""

    def __init__(self, k, j, pivot):
        super().__init__(f"resonance at level k={k}, order j={j} (pivot={pivot!r})")
        self.k, self.j, self.pivot = k, j, pivot


class RayError(TronqueeError, ValueError):
    """The Laplace ray passes too close to a Borel-plane singularity."""


class SectorError(TronqueeError, ValueError):
    """No admissible Laplace ray exists for the requested point and side."""


class StiffnessError(TronqueeError, RuntimeError):
    """The integrator step size underflowed without a blowup."""


class PathError(TronqueeError, RuntimeError):
    """A waypoint of an integration path could not be reached."""


class FitError(TronqueeError, RuntimeError):
    """A constant fit is ill-conditioned (sample spread too large)."""
