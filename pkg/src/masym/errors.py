"""Exception types shared across the package."""


class MasymError(Exception):
    """Base class for all package errors."""


class BodyError(MasymError):
    """Invalid convex body (origin not interior, unbounded, bad vertices)."""


class ProfileError(MasymError):
    """Invalid radial profile or profile operation."""


class FieldError(MasymError):
    """Grid field generation or discrete operator failure."""


class PathError(MasymError):
    """Invalid potential path construction or evaluation."""


class ConfigError(MasymError):
    """Run configuration parse or validation failure."""
