"""Exception hierarchy shared by all vortexlab modules.

The CLI maps these onto exit codes: parameter/usage problems -> 2,
numerical failures -> 3, method-validity violations -> 4.
"""


class VortexLabError(Exception):
    """Base class for all vortexlab errors."""


class InvalidParameter(VortexLabError):
    """Arguments outside the documented preconditions."""


class ResolutionGuard(InvalidParameter):
    """Grid spacing too coarse for the requested operator."""


class GridMismatch(InvalidParameter):
    """Profile grid incompatible with the requested operator."""


class InsufficientData(InvalidParameter):
    """Not enough samples to perform a fit."""


class NumericalFailure(VortexLabError):
    """A numerical method failed to produce a usable result."""


class QuadratureFailure(NumericalFailure):
    """Adaptive quadrature did not reach the requested tolerance."""


class NewtonDiverged(NumericalFailure):
    """Damped Newton iteration found no acceptable step."""


class NotPositive(NumericalFailure):
    """Newton converged to a sign-changing profile."""


class NotConverged(NumericalFailure):
    """Operation requires a converged profile."""


class EigensolveFailure(NumericalFailure):
    """Eigenvalue iteration did not converge."""


class LinearSolveFailure(NumericalFailure):
    """A linear solve produced non-finite values."""


class OutOfValidityRange(VortexLabError):
    """Parameters outside the regime where the method is meaningful."""
