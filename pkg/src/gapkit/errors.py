"""Exception hierarchy for gapkit."""


class GapKitError(Exception):
    """Base class for all gapkit errors."""


class PreconditionError(GapKitError, ValueError):
    """Raised when an operation is called outside its domain."""


class DomainError(PreconditionError):
    """Raised for scalar arguments outside a formula's validity range."""


class InvalidParametersError(PreconditionError):
    """Raised when relaxation parameters fall outside every admissible case."""


class ProjectionError(GapKitError):
    """Raised when a projection cannot be computed.

    Attributes
    ----------
    residual : float or None
        Final KKT residual of an iterative projection, when available.
    trace : IterationTrace or None
        Partial iteration trace, attached by the GAP engine when a run aborts.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
        self.trace = None


class SingularityError(ProjectionError):
    """Raised when the projection is not unique (e.g. a sphere's center)."""


class DegenerateManifoldError(GapKitError):
    """Raised when a defining Jacobian loses full row rank."""


class NonsmoothPointError(GapKitError):
    """Raised when a smooth-boundary quantity is requested at a kink."""


class TangentCaseError(GapKitError):
    """Raised when two boundaries share a tangent space at the query point."""


class NotConvergentError(GapKitError):
    """Raised when a matrix has spectral radius above one."""


class InconsistencyError(GapKitError):
    """Raised when caller-supplied data contradicts a computed quantity."""


class InsufficientDataError(GapKitError):
    """Raised when too few usable samples remain for a fit or estimate."""
