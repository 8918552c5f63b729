"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid scheme parameters (constellation order, antenna count, ...)."""


class ResourceCapError(RuntimeError):
    """A requested computation exceeds a configured size cap."""
