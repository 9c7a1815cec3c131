"""Visualization errors."""


class VisualizationError(ValueError):
    """Raised when a panel cannot be rendered or an example index is out of range."""

    pass
