"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input or parameter violates its documented contract."""


class DomainError(ValidationError):
    """Raised when a request is well-formed but has no solution (unstable filter, unreachable target)."""


class NumericalError(ArithmeticError):
    """Raised when a numerical procedure fails to converge or is ill-conditioned."""
