"""Semantic exceptions shared across the package."""


class SojournError(Exception):
    """Base class for all package-specific errors."""


class ToleranceNotReachedError(SojournError):
    """A series or quadrature could not meet the requested tolerance
    within its configured maximum order."""


class DivergentIntegralError(SojournError):
    """A requested integral does not converge for the given parameters."""


class FitMismatchError(SojournError):
    """A closed-form quantity disagrees with its internal numerical
    verification beyond tolerance."""


class CrossValidationError(SojournError):
    """Two independent computation routes for the same quantity disagree."""


class NotPositiveSemidefiniteError(SojournError):
    """Circulant embedding stayed indefinite after padding escalation."""


class GridMismatchError(SojournError):
    """Field samples live on incompatible grids, or a lag is not
    representable on the grid."""
