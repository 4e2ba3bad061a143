"""Exception types raised by wehrl_lab."""


class WehrlLabError(Exception):
    """Base class for all library errors."""


class DomainError(WehrlLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(WehrlLabError, ValueError):
    """Invalid orders, parameters or run configuration."""


class EvaluationError(WehrlLabError, ArithmeticError):
    """A numerical evaluation produced NaN or otherwise failed."""


class ResolutionError(WehrlLabError):
    """The quadrature rule cannot resolve the requested region."""


class InconsistencyError(WehrlLabError):
    """Numerical output contradicts a structural property (usually under-resolution)."""


class StepSizeUnderflow(WehrlLabError, ArithmeticError):
    """Adaptive ODE integration could not meet its tolerance."""
