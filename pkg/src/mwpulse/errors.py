"""Exception types raised by the numerical kernels."""


class MatterWaveError(Exception):
    """Base class for all errors raised by :mod:`mwpulse`."""


class DomainError(MatterWaveError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class RangeError(MatterWaveError, OverflowError):
    """A result cannot be represented as a finite double."""


class DegenerateInputError(MatterWaveError, ValueError):
    """The input hits a removable or genuine degeneracy the routine does not handle."""


class AccuracyError(MatterWaveError, RuntimeError):
    """A numerical procedure failed to reach its requested tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class PropagationError(MatterWaveError, RuntimeError):
    """Grid propagation produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
