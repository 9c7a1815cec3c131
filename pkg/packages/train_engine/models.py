"""Training configuration and records."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from packages.autodiff import NormMode
from packages.ladder import LadderConfig
from packages.tag_mechanism import ClassCostIterations, CorruptionMode, CorruptionSpec

TrainingPhase = Literal["unsupervised", "supervised"]


class TrainConfig(BaseModel):
    """Everything that determines a training run."""

    # Grouping
    groups: int = Field(default=4, description="K, number of groups", ge=1)
    train_iterations: int = Field(default=3, description="T during training", ge=1)
    eval_iterations: int = Field(default=5, description="T during evaluation", ge=1)

    # Corruption
    corruption: CorruptionMode = Field(default=CorruptionMode.BITFLIP, description="gaussian or bitflip")
    sigma: float = Field(default=0.2, description="Gaussian noise standard deviation", gt=0.0)
    beta: float = Field(default=0.2, description="Bit-flip probability", gt=0.0, lt=0.5)
    eval_keep_sigma: bool = Field(default=True, description="Keep σ (or β) in the likelihood at evaluation")

    # Optimization
    batch_size: int = Field(default=100, ge=1)
    epochs: int = Field(default=20, description="Unsupervised epochs", ge=0)
    supervised_epochs: int = Field(default=0, description="Epochs with the class head", ge=0)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_epsilon: float = Field(default=1e-8, gt=0.0)

    # Model
    layer_sizes: tuple[int, ...] = Field(default=(256, 128, 64), min_length=1)
    normalization: NormMode = Field(default="layer")

    # Semi-supervised
    label_budget: int = Field(default=1000, description="Labeled examples", ge=1)
    class_count: int = Field(default=10, ge=1)
    class_weight: float = Field(default=1.0, description="λ_class", ge=0.0)
    class_cost_iterations: ClassCostIterations = Field(default="last")

    # Bookkeeping
    seed: int = Field(default=0, ge=0)
    train_examples: int | None = Field(
        default=None, description="Use only the first n examples of the dataset", ge=2
    )
    validation_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_batch_norm(self) -> TrainConfig:
        if self.normalization == "batch" and self.batch_size < 2:
            raise ValueError("batch normalization needs batch_size >= 2")
        if any(size < 1 for size in self.layer_sizes):
            raise ValueError("layer sizes must be >= 1")
        return self

    @property
    def corruption_spec(self) -> CorruptionSpec:
        if self.corruption == CorruptionMode.GAUSSIAN:
            return CorruptionSpec.gaussian(self.sigma)
        return CorruptionSpec.bitflip(self.beta)

    def ladder_config(self, input_size: int) -> LadderConfig:
        return LadderConfig(
            input_size=input_size,
            layer_sizes=self.layer_sizes,
            normalization=self.normalization,
        )


class EpochMetrics(BaseModel):
    """One row of the metrics file."""

    epoch: int = Field(..., ge=1)
    phase: TrainingPhase
    step: int = Field(..., description="Optimizer steps so far", ge=0)
    train_cost: float = Field(..., description="Mean training cost over the epoch")
    class_cost: float | None = Field(default=None, description="Mean cross-entropy on labeled rows")
    validation_costs: list[float] = Field(default_factory=list, description="C_i per eval iteration")

    model_config = {"frozen": True}
