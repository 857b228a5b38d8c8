"""Exception hierarchy shared by every module of the package."""


class DeformationError(Exception):
    """Base class for all errors raised by :mod:`unideform`."""


class InvalidArgumentError(DeformationError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(DeformationError, ValueError):
    """Input lies outside the domain where a construction is defined."""


class DegenerateStateError(DeformationError, ValueError):
    """A state with zero norm was supplied where a physical state is required."""


class NodeSingularityError(DomainError):
    """The density vanishes where the phase construction divides by it.

    Attributes
    ----------
    location : float or None
        Position (or radius) of the offending node.
    case : str
        ``"divergent"`` when the numerator does not vanish at the node.
    """

    def __init__(self, message, location=None, case="divergent"):
        super().__init__(message)
        self.location = location
        self.case = case


class DegeneracyError(DeformationError):
    """Two instantaneous eigenvalues come closer than the configured gap."""


class MeshTooCoarseError(DeformationError):
    """Consecutive samples are too far apart to follow a quantity continuously."""


class InfeasibleSpeedError(DeformationError):
    """The requested sweep is too fast for a diagonal deformation to exist."""


class NoSolutionFoundError(DeformationError):
    """An iterative solver failed to converge."""


class UndeterminedPotentialError(DeformationError):
    """An eigenvector component vanishes, leaving a potential entry unconstrained.

    Attributes
    ----------
    window : tuple of float
        First and last mesh time at which the component vanished.
    component : int
        Index of the vanishing component.
    """

    def __init__(self, message, window=None, component=None):
        super().__init__(message)
        self.window = window
        self.component = component


class CoordinateSingularityError(DeformationError):
    """The rotation-angle parametrization becomes singular along the trajectory."""


class SingularSystemError(DeformationError):
    """A linear elimination step met a vanishing denominator."""


class GridTooSmallError(DeformationError):
    """The wavefunction reaches the edge of the spatial grid."""
