"""Exception types raised across the package."""


class IsoflowError(Exception):
    """Base class for all package errors."""


class DimensionError(IsoflowError, ValueError):
    """Operands have incompatible orders or shapes."""


class NotPSDError(IsoflowError, ValueError):
    """An operator expected to be positive semi-definite has a significantly negative eigenvalue."""


class SingularError(IsoflowError, ValueError):
    """An operator that must be invertible is singular."""


class NotProjectorError(IsoflowError, ValueError):
    """An operator expected to be an orthogonal projector is not idempotent or not self-adjoint."""


class IntegratorError(IsoflowError, RuntimeError):
    """The ODE integrator could not complete."""


class StiffnessError(IntegratorError):
    """Step size underflow; the problem looks stiff near the current state."""
