"""Exception hierarchy shared by all modules."""


class FrictionCompError(Exception):
    """Base class for every error raised by this package."""


class InputError(FrictionCompError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class DomainError(FrictionCompError, ValueError):
    """Argument outside the domain where a map is defined."""


class StateError(FrictionCompError, ValueError):
    """Hybrid state violates its invariants."""


class UnboundedSetError(FrictionCompError, ValueError):
    """The requested set covers the whole position axis."""


class StabilityViolationError(FrictionCompError, ValueError):
    """Relay gain too small for the twisting-type bounds to exist."""


class BracketError(FrictionCompError, ValueError):
    """Guard function has no sign change on the given bracket."""


class SingularityError(FrictionCompError, ZeroDivisionError):
    """Transfer function evaluated on a pole."""


class IntegrationError(FrictionCompError, RuntimeError):
    """Integrator could not make progress (step underflow, event cascade)."""


class DivergenceError(IntegrationError):
    """State became non-finite."""


class PreconditionError(FrictionCompError, ValueError):
    """Input does not satisfy the precondition of an analysis."""


class InsufficientDataError(FrictionCompError, ValueError):
    """Not enough samples or events to run an analysis."""


class InconclusiveError(FrictionCompError, RuntimeError):
    """Analysis ran but could not reach a verdict."""


class CycleError(FrictionCompError, ValueError):
    """Requested hysteresis cycle is not closed."""


class SweepFailedError(FrictionCompError, RuntimeError):
    """No grid point of a gain sweep converged."""


class ConfigError(FrictionCompError, ValueError):
    """Invalid scenario configuration."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
