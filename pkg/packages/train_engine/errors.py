"""Training errors."""

from pathlib import Path


class ConfigLoadError(Exception):
    """Raised when a training config or preset file cannot be loaded or validated."""

    pass


class NonFiniteGradientError(ArithmeticError):
    """Raised when a gradient contains NaN or infinity; the update is not applied."""

    def __init__(self, parameter: str) -> None:
        super().__init__(f"non-finite gradient for parameter '{parameter}'")
        self.parameter = parameter


class TrainingDivergedError(ArithmeticError):
    """Raised when the training cost stops being finite."""

    def __init__(self, message: str, last_checkpoint: Path | None = None) -> None:
        if last_checkpoint is not None:
            message = f"{message}; last good checkpoint: {last_checkpoint}"
        super().__init__(message)
        self.last_checkpoint = last_checkpoint


class LabelDataError(ValueError):
    """Raised when class labels are missing or outside the class range."""

    pass


class CheckpointMismatchError(ValueError):
    """Raised when a checkpoint does not fit the requested configuration."""

    pass
