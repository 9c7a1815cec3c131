"""Batch and layer normalization with learned scale/shift."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import ops
from .errors import ContractError
from .tensor import Tensor

NormMode = Literal["batch", "layer"]

NORM_EPS = 1e-6
VARIANCE_FLOOR = 1e-12
RUNNING_MOMENTUM = 0.99


@dataclass
class RunningStats:
    """Exponential moving averages of per-feature batch statistics."""

    mean: np.ndarray
    var: np.ndarray
    momentum: float = RUNNING_MOMENTUM
    updates: int = field(default=0)

    @classmethod
    def zeros(cls, width: int) -> RunningStats:
        return cls(mean=np.zeros(width), var=np.ones(width))

    def update(self, batch_mean: np.ndarray, batch_var: np.ndarray) -> None:
        self.mean = self.momentum * self.mean + (1.0 - self.momentum) * batch_mean
        self.var = self.momentum * self.var + (1.0 - self.momentum) * batch_var
        self.updates += 1


def normalize_layer(
    t: Tensor,
    mode: NormMode,
    stats: RunningStats | None = None,
    training: bool = True,
    scale: Tensor | None = None,
    shift: Tensor | None = None,
    eps: float = NORM_EPS,
) -> Tensor:
    """
    Normalize a [rows, features] tensor to zero mean and unit variance.

    Layer mode normalizes each row over its features. Batch mode normalizes
    each feature over the rows while training (updating ``stats``) and with
    the running statistics at evaluation. Variances are clamped to 1e-12
    before ``eps`` is added.

    Args:
        t: Input of shape [rows, features].
        mode: "batch" or "layer".
        stats: Running statistics, required in batch mode.
        training: Whether batch statistics are used and recorded.
        scale: Optional per-feature gain.
        shift: Optional per-feature bias.
        eps: Added to the variance.

    Returns:
        Normalized tensor, same shape as ``t``.

    Raises:
        ContractError: Batch mode with fewer than 2 rows while training,
            or without running statistics.
    """
    if t.ndim != 2:
        raise ContractError(f"normalize_layer expects [rows, features], got {t.dims}")

    if mode == "layer":
        mu = ops.mean(t, axis=1, keepdims=True)
        centered = t - mu
        var = ops.mean(ops.square(centered), axis=1, keepdims=True)
        out = centered / ops.sqrt(ops.clamp_min(var, VARIANCE_FLOOR) + eps)
    elif mode == "batch":
        if stats is None:
            raise ContractError("batch normalization needs running statistics")
        if training:
            if t.dims[0] < 2:
                raise ContractError("batch normalization needs at least 2 rows while training")
            mu = ops.mean(t, axis=0, keepdims=True)
            centered = t - mu
            var = ops.mean(ops.square(centered), axis=0, keepdims=True)
            stats.update(mu.data[0], var.data[0])
            out = centered / ops.sqrt(ops.clamp_min(var, VARIANCE_FLOOR) + eps)
        else:
            denom = np.sqrt(np.maximum(stats.var, VARIANCE_FLOOR) + eps)
            out = (t - stats.mean) / denom
    else:
        raise ValueError(f"Unknown normalization mode '{mode}'")

    if scale is not None:
        out = out * scale
    if shift is not None:
        out = out + shift
    return out
