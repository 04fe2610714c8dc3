"""Exception types raised across the package."""


class SamplingError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SamplingError, ValueError):
    """Inputs violate an operation's preconditions."""


class InsufficientMeasurementsError(InvalidInputError):
    """More measurements requested than there are positive-coherence rows."""


class InfeasibleError(SamplingError, ValueError):
    """No parameter value satisfies the requested constraint."""


class ResourceExhaustedError(SamplingError, RuntimeError):
    """A randomized loop ran out of its attempt budget."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts
