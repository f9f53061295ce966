"""Exception types shared across the package."""


class GreenfigError(Exception):
    """Base class for all package errors."""


class ValidationError(GreenfigError, ValueError):
    """Input object violates a structural invariant (curve, mesh, config)."""


class DomainError(GreenfigError, ValueError):
    """Argument outside the operation's domain (bad cut, bad step, small box)."""


class IndeterminateError(GreenfigError):
    """A point lies within the declared error band of a curve."""
