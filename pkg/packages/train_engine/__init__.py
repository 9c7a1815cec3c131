"""Training engine package: configs, Adam, checkpoints and the training loops."""

from packages.train_engine.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from packages.train_engine.config import (
    DEFAULT_PRESETS_PATH,
    build_train_config,
    config_to_text,
    load_presets,
    load_train_config,
    parse_key_values,
)
from packages.train_engine.errors import (
    CheckpointMismatchError,
    ConfigLoadError,
    LabelDataError,
    NonFiniteGradientError,
    TrainingDivergedError,
)
from packages.train_engine.models import EpochMetrics, TrainConfig, TrainingPhase
from packages.train_engine.optimizer import OptimizerState, adam_step
from packages.train_engine.trainer import (
    Trainer,
    TrainResult,
    class_cross_entropy,
    load_labeled_indices,
    metrics_header,
    select_labeled_indices,
    split_validation,
    train_semisupervised,
    train_unsupervised,
)

__all__ = [
    # Models
    "EpochMetrics",
    "TrainConfig",
    "TrainingPhase",
    # Config
    "DEFAULT_PRESETS_PATH",
    "build_train_config",
    "config_to_text",
    "load_presets",
    "load_train_config",
    "parse_key_values",
    # Optimizer
    "OptimizerState",
    "adam_step",
    # Checkpoints
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    # Training
    "Trainer",
    "TrainResult",
    "class_cross_entropy",
    "load_labeled_indices",
    "metrics_header",
    "select_labeled_indices",
    "split_validation",
    "train_semisupervised",
    "train_unsupervised",
    # Errors
    "CheckpointMismatchError",
    "ConfigLoadError",
    "LabelDataError",
    "NonFiniteGradientError",
    "TrainingDivergedError",
]
