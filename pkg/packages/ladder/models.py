"""Configuration and parameter store of the Tagger mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator

from packages.autodiff import NormMode, RunningStats, Tensor, make_rng

from .errors import LadderError

InputMode = Literal["continuous", "binary"]

INITIAL_VARIANCE = 0.25

# Combinator parameters a1..a10 and their initial values
COMBINATOR_INIT = (0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)


class LadderConfig(BaseModel):
    """Shape of the parametric mapping.

    The first entry of ``layer_sizes`` is the hidden width H of the input
    projection; the remaining entries are the Ladder encoder layers.
    """

    input_size: int = Field(..., description="Elements per example (N)", ge=1)
    layer_sizes: tuple[int, ...] = Field(
        ...,
        description="H followed by encoder widths, e.g. (3000, 2000, 1000, 500, 250)",
        min_length=1,
    )
    normalization: NormMode = Field(default="layer", description="batch or layer normalization")
    class_count: int = Field(default=0, description="Classes of the head; 0 disables it", ge=0)
    class_hidden: int | None = Field(
        default=None,
        description="Width of the first class-head layer (defaults to the top width)",
        ge=1,
    )

    model_config = {"frozen": True}

    @field_validator("layer_sizes")
    @classmethod
    def _positive_sizes(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(size < 1 for size in v):
            raise ValueError("all layer sizes must be >= 1")
        return v

    @property
    def hidden_width(self) -> int:
        return self.layer_sizes[0]

    @property
    def depth(self) -> int:
        """Number of encoder layers above the input projection."""
        return len(self.layer_sizes) - 1

    @property
    def top_width(self) -> int:
        return self.layer_sizes[-1]

    @property
    def class_hidden_width(self) -> int:
        return self.class_hidden or self.top_width


def _gaussian_weights(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.standard_normal(size=(fan_in, fan_out)) / math.sqrt(fan_in)


@dataclass
class TaggerParams:
    """
    All trainable weights plus running normalization statistics.

    One parameter set is shared by every group and iteration, so its size
    does not depend on K or T.
    """

    config: LadderConfig
    mode: InputMode
    data_mean: float
    params: dict[str, Tensor] = field(default_factory=dict)
    stats: dict[str, RunningStats] = field(default_factory=dict)

    @classmethod
    def initialize(
        cls,
        config: LadderConfig,
        mode: InputMode,
        data_mean: float,
        rng: np.random.Generator,
    ) -> TaggerParams:
        """Fresh parameters; the class head is added when ``config.class_count`` > 0."""
        n, widths = config.input_size, config.layer_sizes
        params: dict[str, Tensor] = {}

        def add(name: str, value: np.ndarray) -> None:
            params[name] = Tensor(value, requires_grad=True, name=name)

        add("W_h", _gaussian_weights(rng, 4 * n, widths[0]))
        add("b_h", np.zeros(widths[0]))
        add("gamma_h", np.ones(widths[0]))
        add("beta_h", np.zeros(widths[0]))

        for level in range(1, len(widths)):
            add(f"enc{level}.W", _gaussian_weights(rng, widths[level - 1], widths[level]))
            add(f"enc{level}.gamma", np.ones(widths[level]))
            add(f"enc{level}.beta", np.zeros(widths[level]))
            add(f"dec{level}.V", _gaussian_weights(rng, widths[level], widths[level - 1]))

        for level, width in enumerate(widths):
            for index, value in enumerate(COMBINATOR_INIT, start=1):
                add(f"comb{level}.a{index}", np.full(width, value))

        add("W_u", _gaussian_weights(rng, widths[0], 2 * n))
        add("b_u", np.zeros(2 * n))

        if mode == "continuous":
            add("log_v", np.asarray(math.log(INITIAL_VARIANCE)))

        stats: dict[str, RunningStats] = {}
        if config.normalization == "batch":
            stats["input"] = RunningStats.zeros(widths[0])
            for level, width in enumerate(widths):
                if level > 0:
                    stats[f"enc{level}"] = RunningStats.zeros(width)
                stats[f"dec{level}"] = RunningStats.zeros(width)

        model = cls(
            config=config.model_copy(update={"class_count": 0}),
            mode=mode,
            data_mean=float(data_mean),
            params=params,
            stats=stats,
        )
        if config.class_count > 0:
            model.add_class_head(config.class_count, rng, hidden=config.class_hidden)
        return model

    def add_class_head(
        self,
        class_count: int,
        rng: np.random.Generator,
        hidden: int | None = None,
    ) -> None:
        """Attach two fresh layers with a (C+1)-way output, the last one meaning "no class"."""
        if class_count < 1:
            raise LadderError("class head needs at least one class")
        self.config = self.config.model_copy(
            update={"class_count": class_count, "class_hidden": hidden or self.config.class_hidden}
        )
        top, width = self.config.top_width, self.config.class_hidden_width
        for name, value in (
            ("cls1.W", _gaussian_weights(rng, top, width)),
            ("cls1.b", np.zeros(width)),
            ("cls2.W", _gaussian_weights(rng, width, class_count + 1)),
            ("cls2.b", np.zeros(class_count + 1)),
        ):
            self.params[name] = Tensor(value, requires_grad=True, name=name)

    @property
    def has_class_head(self) -> bool:
        return self.config.class_count > 0 and "cls2.W" in self.params

    @property
    def log_v(self) -> Tensor | None:
        return self.params.get("log_v")

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self.params[name]
        except KeyError:
            raise LadderError(f"missing parameter '{name}'") from None

    def to_arrays(self) -> dict[str, np.ndarray]:
        """Flat name → array view for persistence."""
        arrays = {f"param/{name}": p.data.copy() for name, p in self.params.items()}
        for key, running in self.stats.items():
            arrays[f"stats/{key}/mean"] = running.mean.copy()
            arrays[f"stats/{key}/var"] = running.var.copy()
        return arrays

    @classmethod
    def from_arrays(
        cls,
        config: LadderConfig,
        mode: InputMode,
        data_mean: float,
        arrays: dict[str, np.ndarray],
    ) -> TaggerParams:
        """Inverse of ``to_arrays``; checks every expected parameter is present with its shape."""
        expected = cls.initialize(config, mode, data_mean, make_rng(0))
        params: dict[str, Tensor] = {}
        for name, template in expected.params.items():
            stored = arrays.get(f"param/{name}")
            if stored is None:
                raise LadderError(f"stored parameters lack '{name}'")
            if stored.shape != template.dims:
                raise LadderError(f"parameter '{name}' has dims {stored.shape}, expected {template.dims}")
            params[name] = Tensor(np.array(stored, dtype=np.float64), requires_grad=True, name=name)

        stats: dict[str, RunningStats] = {}
        for key in expected.stats:
            try:
                stats[key] = RunningStats(
                    mean=np.array(arrays[f"stats/{key}/mean"], dtype=np.float64),
                    var=np.array(arrays[f"stats/{key}/var"], dtype=np.float64),
                )
            except KeyError:
                raise LadderError(f"stored statistics lack '{key}'") from None
        return cls(config=config, mode=mode, data_mean=float(data_mean), params=params, stats=stats)

    def snapshot(self) -> TaggerParams:
        """Independent copy, safe to hand to an evaluation worker."""
        return TaggerParams.from_arrays(self.config, self.mode, self.data_mean, self.to_arrays())
