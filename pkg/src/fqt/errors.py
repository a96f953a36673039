"""Exception types raised by the simulator."""


class FQTError(Exception):
    """Base class for all simulator errors."""


class DomainError(FQTError, ValueError):
    """An input lies outside the domain where a quantity is defined."""


class NumericalError(FQTError, ArithmeticError):
    """A computation failed to produce a finite or converged result."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class UnsupportedProtocolError(DomainError):
    """The harmonic spectrum is not supported by the requested builder."""


class DegenerateGeneratorError(NumericalError):
    """The generator has more than one (near) zero mode."""


class SingularRegimeError(NumericalError):
    """A closed-form denominator vanishes."""


class OptimizationFailed(FQTError, RuntimeError):
    """Every optimizer restart failed to produce a finite objective."""

    def __init__(self, message, logs=None):
        super().__init__(message)
        self.logs = logs or []
