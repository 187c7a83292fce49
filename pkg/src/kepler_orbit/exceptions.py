"""Exception hierarchy shared by all modules."""


class KeplerOrbitError(Exception):
    """Base class for every error raised by this package."""


class ConstraintViolation(KeplerOrbitError, ValueError):
    pass


class DegeneratePoint(KeplerOrbitError, ValueError):
    pass


class ChartSingularity(KeplerOrbitError, ValueError):
    pass


class InvalidIndex(KeplerOrbitError, IndexError):
    pass


class EvaluationFailure(KeplerOrbitError, ArithmeticError):
    pass


class SingularityApproach(KeplerOrbitError, RuntimeError):
    """The flow came within the guard distance of a chart singularity."""


class StepRejected(KeplerOrbitError, RuntimeError):
    """An implicit step failed to converge."""


class DegenerateEnergy(KeplerOrbitError, ValueError):
    pass


class AntipodeReached(KeplerOrbitError, ValueError):
    """The coset image left the stereographic chart (x -> infinity)."""


class CoordinateSingularity(KeplerOrbitError, ValueError):
    pass


class UnboundMotion(KeplerOrbitError, ValueError):
    pass


class UnboundState(KeplerOrbitError, ValueError):
    pass


class TurningPointFailure(KeplerOrbitError, RuntimeError):
    pass


class DegenerateActions(KeplerOrbitError, ValueError):
    pass


class DegenerateOrbit(KeplerOrbitError, ValueError):
    """Angle variables are 0/0 (circular, equatorial or polar orbit)."""


class BranchAmbiguity(KeplerOrbitError, RuntimeError):
    pass


class NonConvergence(KeplerOrbitError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
