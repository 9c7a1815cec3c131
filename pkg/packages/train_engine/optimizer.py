"""Adam with bias correction over named parameters."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from packages.autodiff import ShapeError, Tensor

from .errors import NonFiniteGradientError


@dataclass
class OptimizerState:
    """First/second moment estimates per parameter and the step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_params(cls, params: Mapping[str, Tensor]) -> OptimizerState:
        return cls(
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )

    def ensure(self, params: Mapping[str, Tensor]) -> None:
        """Add zero moments for parameters created after the state (e.g. a new class head)."""
        for name, p in params.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: OptimizerState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> OptimizerState:
    """
    Apply one bias-corrected Adam update in place.

    All gradients are checked before any parameter changes.

    Args:
        params: Parameters to update.
        grads: Gradient per parameter name.
        state: Moments and step counter, updated in place.
        lr: Learning rate.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        eps: Denominator offset.

    Returns:
        The updated state.

    Raises:
        NonFiniteGradientError: A gradient holds NaN or infinity.
        ShapeError: A gradient's shape differs from its parameter's.
    """
    state.ensure(params)
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.dims:
            raise ShapeError(f"gradient for '{name}' has shape {g.shape}, parameter {p.dims}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name)

    state.step += 1
    bc1 = 1.0 - beta1**state.step
    bc2 = 1.0 - beta2**state.step
    for name, p in params.items():
        g = grads[name]
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + eps)
    return state
