"""Exception types raised across the package."""


class CycleFVError(Exception):
    """Base class for all package errors."""


class DomainError(CycleFVError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class EmptySite(CycleFVError, ValueError):
    """A particle was requested from a site holding no particles."""


class SolveError(CycleFVError, ArithmeticError):
    """A linear solve hit a (numerically) singular system."""


class TooLarge(CycleFVError, ValueError):
    """The requested state space exceeds the enumeration budget."""


class InsufficientData(CycleFVError, ValueError):
    """Not enough replicas or samples to form an estimate."""


class StepSizeUnderflow(CycleFVError, ArithmeticError):
    """The adaptive ODE integrator could not make progress."""
