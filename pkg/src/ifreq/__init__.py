"""Instantaneous frequency estimation by smoothing one-sample phase differences."""

from .errors import DomainError, NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["DomainError", "NumericalError", "ValidationError", "__version__"]
