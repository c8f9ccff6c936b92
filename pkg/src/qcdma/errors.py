"""Exception types shared across the package."""


class QcdmaError(Exception):
    """Base class for package errors."""


class ConfigError(QcdmaError, ValueError):
    """A scenario or argument failed validation."""


class CapacityError(QcdmaError):
    """A requested computation exceeds a documented capacity cap."""


class InvariantError(QcdmaError):
    """A physical invariant was violated beyond its tolerance."""
