"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a configuration value or precondition is invalid."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine produces a non-finite result."""
