"""Exception types raised across the package.

Each maps to a distinct CLI exit code (see ``uridensity.cli``).
"""


class UriDensityError(Exception):
    """Base class for all package errors."""


class ParameterError(UriDensityError, ValueError):
    """A parameter is outside its documented range."""


class ElementSizeError(UriDensityError):
    """A URI stream element outgrew the configured size cap."""


class MemoryBudgetError(UriDensityError):
    """A table would exceed the configured memory budget."""


class DependentBasesError(ParameterError):
    """Bases admit a multiplicative relation where independence is required."""
