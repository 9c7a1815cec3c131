"""Domain types for the grouping iteration."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from pydantic import BaseModel, Field, model_validator

from packages.autodiff import Tensor, exp
from packages.ladder import InputMode


class CorruptionMode(str, Enum):
    """Kind of noise applied to the clean input."""

    GAUSSIAN = "gaussian"
    BITFLIP = "bitflip"


class CorruptionSpec(BaseModel):
    """Corruption applied to inputs before they reach the network."""

    mode: CorruptionMode = Field(..., description="Noise kind")
    sigma: float | None = Field(
        default=None,
        description="Standard deviation of additive Gaussian noise",
        gt=0.0,
    )
    beta: float | None = Field(
        default=None,
        description="Bit-flip probability",
        gt=0.0,
        lt=0.5,
    )

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_mode_parameter(self) -> CorruptionSpec:
        if self.mode == CorruptionMode.GAUSSIAN and self.sigma is None:
            raise ValueError("gaussian corruption needs sigma > 0")
        if self.mode == CorruptionMode.BITFLIP and self.beta is None:
            raise ValueError("bitflip corruption needs 0 < beta < 0.5")
        return self

    @classmethod
    def gaussian(cls, sigma: float) -> CorruptionSpec:
        return cls(mode=CorruptionMode.GAUSSIAN, sigma=sigma)

    @classmethod
    def bitflip(cls, beta: float) -> CorruptionSpec:
        return cls(mode=CorruptionMode.BITFLIP, beta=beta)

    @property
    def input_mode(self) -> InputMode:
        """Likelihood family matching this corruption."""
        return "continuous" if self.mode == CorruptionMode.GAUSSIAN else "binary"


@dataclass(frozen=True)
class GroupState:
    """
    Per-group quantities of one iteration for a batch.

    ``z`` and ``m`` are [B, K, N]. In binary mode ``z`` holds probabilities and
    ``z_logits`` the matching pre-sigmoid values (absent for the initial
    state). ``m_logits`` is the pre-softmax output the masks came from.
    """

    z: Tensor
    m: Tensor
    iteration: int
    z_logits: Tensor | None = None
    m_logits: Tensor | None = None

    @property
    def batch_size(self) -> int:
        return self.z.dims[0]

    @property
    def groups(self) -> int:
        return self.z.dims[1]

    @property
    def elements(self) -> int:
        return self.z.dims[2]


@dataclass(frozen=True)
class NoiseModelParams:
    """Group variance v, stored as log v."""

    log_v: Tensor

    @property
    def v(self) -> Tensor:
        return exp(self.log_v)


@dataclass
class Trajectory:
    """Record of one forward run over T iterations."""

    corrupted: Tensor
    states: list[GroupState] = field(default_factory=list)
    reconstructions: list[Tensor] = field(default_factory=list)
    costs: list[Tensor] = field(default_factory=list)
    class_outputs: list[Tensor] = field(default_factory=list)
    class_predictions: Tensor | None = None

    @property
    def iterations(self) -> int:
        return len(self.costs)

    @property
    def total_cost(self) -> Tensor:
        """C = Σ_i C_i."""
        total = self.costs[0]
        for cost in self.costs[1:]:
            total = total + cost
        return total

    @property
    def mean_cost(self) -> Tensor:
        """Cost averaged over iterations, the training objective."""
        return self.total_cost / float(self.iterations)

    def cost_values(self) -> list[float]:
        return [c.item() for c in self.costs]

    @property
    def final(self) -> GroupState:
        return self.states[-1]
