"""Dataset domain types."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field

from packages.ladder import InputMode

NO_CLASS = 255
DIGIT_CLASSES = 10
SPLIT_STREAMS: dict[str | None, int] = {None: 0, "train": 1, "validation": 2, "test": 3}


def split_stream(split: str | None) -> int:
    """Stream id of a split; every split of one seed draws from its own streams."""
    try:
        return SPLIT_STREAMS[split]
    except KeyError:
        raise ValueError(f"unknown split {split!r}; expected train, validation or test") from None


class DatasetKind(str, Enum):
    """Generated dataset families."""

    SHAPES = "shapes"
    TMNIST1 = "tmnist1"
    TMNIST2 = "tmnist2"

    @property
    def input_mode(self) -> InputMode:
        return "binary" if self == DatasetKind.SHAPES else "continuous"

    @property
    def data_mean(self) -> float:
        """Initial reconstruction value z⁰ for this family."""
        return 0.26 if self == DatasetKind.SHAPES else 0.5


class DatasetMetadata(BaseModel):
    """Provenance and geometry of a generated dataset."""

    kind: DatasetKind = Field(..., description="Dataset family")
    height: int = Field(..., description="Image height in pixels", ge=1)
    width: int = Field(..., description="Image width in pixels", ge=1)
    seed: int = Field(..., description="Generator seed", ge=0)
    split: str | None = Field(default=None, description="train, validation or test")
    objects: int | None = Field(default=None, description="Objects per image", ge=1)

    model_config = {"frozen": True}

    @property
    def mode(self) -> InputMode:
        return self.kind.input_mode

    @property
    def data_mean(self) -> float:
        return self.kind.data_mean


@dataclass(frozen=True)
class DatasetBundle:
    """
    Inputs with ground truth for a batch of images.

    Attributes:
        inputs: [B, N] float64, in [0, 1] (continuous) or {0, 1} (binary).
        labels: [B, N] uint8; 0 background, 1..S object instance.
        ignore: [B, N] bool; pixels excluded from segmentation scoring.
        class_labels: [B, 2] uint8 digit classes, 255 where absent; None if
            the dataset has no classes.
        metadata: Generation provenance.
    """

    inputs: np.ndarray
    labels: np.ndarray
    ignore: np.ndarray
    metadata: DatasetMetadata
    class_labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.inputs.ndim != 2:
            raise ValueError(f"inputs must be [B, N], got {self.inputs.shape}")
        if self.labels.shape != self.inputs.shape or self.ignore.shape != self.inputs.shape:
            raise ValueError("labels and ignore mask must match the inputs' shape")
        if self.class_labels is not None and self.class_labels.shape[0] != self.inputs.shape[0]:
            raise ValueError("class labels must have one row per example")

    @property
    def count(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def elements(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def has_class_labels(self) -> bool:
        return self.class_labels is not None

    def subset(self, indices: np.ndarray | list[int] | slice) -> DatasetBundle:
        """Rows selected by ``indices``, same metadata."""
        return DatasetBundle(
            inputs=self.inputs[indices],
            labels=self.labels[indices],
            ignore=self.ignore[indices],
            metadata=self.metadata,
            class_labels=None if self.class_labels is None else self.class_labels[indices],
        )

    def class_sets(self) -> list[frozenset[int]]:
        """Digit classes present in each example."""
        if self.class_labels is None:
            return []
        return [frozenset(int(c) for c in row if c != NO_CLASS) for row in self.class_labels]

    def class_targets(self, classes: int = DIGIT_CLASSES) -> np.ndarray:
        """
        Target distributions [B, C]: equal weight on every class present.

        Raises:
            ValueError: A class id is not below ``classes``.
        """
        targets = np.zeros((self.count, classes))
        for row, present in enumerate(self.class_sets()):
            if any(c >= classes for c in present):
                raise ValueError(f"example {row} has a class outside 0..{classes - 1}: {sorted(present)}")
            for c in present:
                targets[row, c] = 1.0 / len(present)
        return targets


class Texture(NamedTuple):
    """Sinusoidal grating: frequency in cycles/pixel, orientation in radians."""

    frequency: float
    orientation: float


@dataclass(frozen=True)
class TextureBank:
    """Fixed set of gratings; an instance adds a phase."""

    textures: tuple[Texture, ...]

    def __len__(self) -> int:
        return len(self.textures)

    def render(self, index: int, phase: float, height: int, width: int) -> np.ndarray:
        """t(x, y) = 0.5 + 0.5·sin(2πf(x cos θ + y sin θ) + φ) with x the column, y the row."""
        frequency, orientation = self.textures[index]
        rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
        angle = 2.0 * math.pi * frequency * (cols * math.cos(orientation) + rows * math.sin(orientation))
        return 0.5 + 0.5 * np.sin(angle + phase)
