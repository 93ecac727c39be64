"""Exception types raised across the package."""


class ConjVIError(Exception):
    """Base class for all package errors."""


class GridError(ConjVIError, ValueError):
    """A grid or grid function violates its structural invariants."""


class EmptyDomainError(ConjVIError, ValueError):
    """A function has no finite value, so its conjugate is undefined."""


class UnsupportedDomainError(ConjVIError, TypeError):
    """An operation received a domain type it cannot handle."""


class InfeasibleStateError(ConjVIError, RuntimeError):
    """No admissible input exists at some state."""

    def __init__(self, state, message=None):
        self.state = state
        if message is None:
            message = f"no admissible input at state {list(map(float, state))}"
        super().__init__(message)


class GridInvariantError(ConjVIError, RuntimeError):
    """A dual grid does not satisfy the covering condition it was built for."""


class ConfigError(ConjVIError, ValueError):
    """Malformed experiment configuration."""
