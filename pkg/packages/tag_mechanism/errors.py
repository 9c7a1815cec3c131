"""Errors raised by the TAG iteration."""


class TagError(Exception):
    """Base class for grouping-mechanism failures."""

    pass


class CorruptionDomainError(TagError, ValueError):
    """Raised when an input cannot be corrupted in the requested mode."""

    pass


class MaskInvariantError(TagError):
    """Raised when group assignments leave the probability simplex."""

    pass
