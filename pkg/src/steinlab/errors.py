class SteinLabError(Exception):
    """Base class for package errors."""


class DomainError(SteinLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(SteinLabError, RuntimeError):
    """A dense object or enumeration would exceed the configured size cap."""


class ConfigError(SteinLabError, ValueError):
    """A scenario configuration is malformed."""
