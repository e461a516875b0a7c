"""Exception types shared across the package."""


class BcnfError(Exception):
    """Base class for all package errors."""


class DegenerateFixedPointError(BcnfError):
    """The requested piece has no unique fixed point (eigenvalue 1)."""


class SingularCycleError(BcnfError):
    """I - M is numerically singular; the cycle escapes to infinity."""


class DomainError(BcnfError):
    """Arguments fall outside the validity domain of a formula."""


class NoBracketError(BcnfError):
    """A root bracket could not be established."""


class IntegrationError(BcnfError):
    """The ODE integrator failed to meet its tolerance."""


class DivergedOrbitError(BcnfError):
    """An orbit escaped the divergence bound where a bounded one was required."""
