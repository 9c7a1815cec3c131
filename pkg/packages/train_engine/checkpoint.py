"""Checkpoints: parameters, optimizer state and config echo in one TAGD container."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from packages.data_foundry import ContainerFormatError, container_read, container_write
from packages.ladder import LadderConfig, LadderError, TaggerParams
from packages.structured_logging import get_logger

from .errors import CheckpointMismatchError
from .models import TrainConfig
from .optimizer import OptimizerState

logger = get_logger(__name__)

ARTIFACT = "checkpoint"


@dataclass
class Checkpoint:
    """A restorable training snapshot."""

    params: TaggerParams
    optimizer: OptimizerState
    config: TrainConfig
    epochs_completed: int = 0
    supervised_epochs_completed: int = 0

    def check_compatible(self, config: TrainConfig) -> None:
        """
        Raise if ``config`` cannot continue from this checkpoint.

        Raises:
            CheckpointMismatchError: Groups, layer sizes, normalization or
                corruption differ.
        """
        fields = ("groups", "layer_sizes", "normalization", "corruption")
        conflicts = [
            f"{name}: checkpoint {getattr(self.config, name)!r}, config {getattr(config, name)!r}"
            for name in fields
            if getattr(self.config, name) != getattr(config, name)
        ]
        if conflicts:
            raise CheckpointMismatchError("config conflicts with checkpoint: " + "; ".join(conflicts))


def save_checkpoint(path: str | Path, checkpoint: Checkpoint) -> Path:
    """Write a checkpoint container."""
    tensors: dict[str, np.ndarray] = dict(checkpoint.params.to_arrays())
    for name in checkpoint.optimizer.m:
        tensors[f"adam/m/{name}"] = checkpoint.optimizer.m[name]
        tensors[f"adam/v/{name}"] = checkpoint.optimizer.v[name]

    metadata: dict[str, Any] = {
        "artifact": ARTIFACT,
        "config": checkpoint.config.model_dump(mode="json"),
        "ladder": checkpoint.params.config.model_dump(mode="json"),
        "mode": checkpoint.params.mode,
        "data_mean": checkpoint.params.data_mean,
        "step": checkpoint.optimizer.step,
        "epochs_completed": checkpoint.epochs_completed,
        "supervised_epochs_completed": checkpoint.supervised_epochs_completed,
    }
    path = container_write(path, tensors, metadata)
    logger.info(
        "checkpoint_saved",
        path=str(path),
        step=checkpoint.optimizer.step,
        epochs=checkpoint.epochs_completed + checkpoint.supervised_epochs_completed,
    )
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Read a checkpoint container.

    Raises:
        ContainerFormatError: The file is not a valid checkpoint.
    """
    arrays, metadata = container_read(path)
    if metadata.get("artifact") != ARTIFACT:
        raise ContainerFormatError(f"{path} does not hold a checkpoint")
    try:
        config = TrainConfig.model_validate(metadata["config"])
        ladder = LadderConfig.model_validate(metadata["ladder"])
        params = TaggerParams.from_arrays(ladder, metadata["mode"], metadata["data_mean"], arrays)
        optimizer = OptimizerState(
            m={name: arrays[f"adam/m/{name}"] for name in params.params if f"adam/m/{name}" in arrays},
            v={name: arrays[f"adam/v/{name}"] for name in params.params if f"adam/v/{name}" in arrays},
            step=int(metadata["step"]),
        )
        return Checkpoint(
            params=params,
            optimizer=optimizer,
            config=config,
            epochs_completed=int(metadata.get("epochs_completed", 0)),
            supervised_epochs_completed=int(metadata.get("supervised_epochs_completed", 0)),
        )
    except (KeyError, ValidationError, LadderError) as e:
        raise ContainerFormatError(f"checkpoint {path} is incomplete or inconsistent: {e}") from e
