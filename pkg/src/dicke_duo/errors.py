"""Exception types raised by the simulator."""


class DickeDuoError(Exception):
    """Base class for all simulator errors."""


class OutOfRangeError(DickeDuoError, ValueError):
    """A parameter lies outside the validated physical range."""


class IntegrationError(DickeDuoError, ArithmeticError):
    """Fixed-step integration became unstable; retry with a smaller step."""


class DegenerateSteadyStateError(DickeDuoError, ArithmeticError):
    """The Liouvillian kernel is not one-dimensional."""


class UndefinedCorrelationError(DickeDuoError, ArithmeticError):
    """Steady-state emission rate vanishes, so g(tau) is undefined."""


class InsufficientStatisticsError(DickeDuoError):
    """Too few emissions to build a correlation estimate."""
