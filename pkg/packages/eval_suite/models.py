"""Evaluation domain types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

TopKScoring = Literal["set", "per_class"]


@dataclass(frozen=True)
class Partition:
    """Integer cluster label per element."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValueError(f"partition labels must be 1-d, got shape {labels.shape}")
        if labels.size and (labels.dtype.kind not in "iub" or labels.min() < 0):
            raise ValueError("partition labels must be non-negative integers")
        object.__setattr__(self, "labels", labels.astype(np.int64))

    @property
    def element_count(self) -> int:
        return int(self.labels.size)

    def __len__(self) -> int:
        return self.element_count


class IterationScores(BaseModel):
    """Scores of one inference iteration averaged over the evaluated examples."""

    iteration: int = Field(..., description="1-based iteration index", ge=1)
    denoising_cost: float = Field(..., description="Mean per-element negative log-likelihood")
    ami: float | None = Field(default=None, description="Mean AMI, None when skipped")


class EvaluationReport(BaseModel):
    """Result of evaluating a checkpoint on a dataset."""

    examples: int = Field(..., description="Evaluated examples", ge=0)
    groups: int = Field(..., description="K used for evaluation", ge=1)
    iterations: list[IterationScores] = Field(default_factory=list)
    top_k_error: float | None = Field(default=None, description="Classification error, if scored")
    top_k_scoring: TopKScoring | None = Field(default=None)
    ablated_group: int | None = Field(default=None)
    notices: list[str] = Field(default_factory=list)

    model_config = {"frozen": True}

    @property
    def denoising_costs(self) -> list[float]:
        return [row.denoising_cost for row in self.iterations]

    @property
    def final_ami(self) -> float | None:
        return self.iterations[-1].ami if self.iterations else None
