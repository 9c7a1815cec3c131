"""Ladder mapping errors."""


class LadderError(Exception):
    """Raised when parameters and configuration disagree."""

    pass


class ClassHeadDisabledError(LadderError):
    """Raised when class predictions are requested from a model without a class head."""

    pass
