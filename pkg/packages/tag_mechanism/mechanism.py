"""
Building blocks of one TAG iteration.

Corruption, initial state, per-group likelihoods of the corrupted input, the
modeling-error signal δz, the likelihood ratio L(m), the mixture cost on the
clean input and group ablation. Tensors are [B, K, N] unless noted; the group
axis is 1.
"""

from __future__ import annotations

import numpy as np

from packages.autodiff import (
    Tensor,
    as_tensor,
    gauss_pdf,
    log,
    log_gauss_pdf,
    log_sigmoid,
    log_softmax_axis,
    logsumexp,
    masked_fill,
    mean,
    softmax_axis,
    sum_,
)
from packages.autodiff.ops import TensorLike

from .errors import CorruptionDomainError, MaskInvariantError, TagError
from .models import CorruptionMode, CorruptionSpec, GroupState, InputMode

GROUP_AXIS = 1
ABLATION_LOGIT = -1e9
DENOMINATOR_FLOOR = 1e-9
SIMPLEX_TOLERANCE = 1e-6


def corrupt(x: TensorLike, spec: CorruptionSpec, rng: np.random.Generator) -> Tensor:
    """
    Draw x̃ from the corruption process.

    Args:
        x: Clean input [B, N].
        spec: Corruption mode and strength.
        rng: Random stream.

    Returns:
        Corrupted input, untracked.

    Raises:
        CorruptionDomainError: Bit-flip corruption of non-binary input.
    """
    data = as_tensor(x).data
    if spec.mode == CorruptionMode.GAUSSIAN:
        assert spec.sigma is not None
        return Tensor(data + rng.normal(0.0, spec.sigma, size=data.shape))

    if not np.all((data == 0.0) | (data == 1.0)):
        raise CorruptionDomainError("bit-flip corruption needs inputs in {0, 1}")
    assert spec.beta is not None
    flips = rng.random(size=data.shape) < spec.beta
    return Tensor(np.logical_xor(data.astype(bool), flips).astype(np.float64))


def init_state(
    batch_size: int,
    groups: int,
    elements: int,
    data_mean: float,
    rng: np.random.Generator,
) -> GroupState:
    """m⁰ = softmax over groups of standard-normal draws; z⁰ = data mean everywhere."""
    if groups < 1:
        raise TagError(f"need at least one group, got K={groups}")
    logits = rng.standard_normal(size=(batch_size, groups, elements))
    m0 = softmax_axis(Tensor(logits), GROUP_AXIS)
    z0 = Tensor(np.full((batch_size, groups, elements), float(data_mean)))
    return GroupState(z=z0, m=Tensor(m0.data), iteration=0, m_logits=Tensor(logits))


def group_likelihood_continuous(
    x_tilde: TensorLike,
    z: TensorLike,
    v: TensorLike,
    sigma: float,
) -> Tensor:
    """ẑ_k = N(x̃; z_k, v + σ²), elementwise."""
    if sigma < 0.0:
        raise TagError("sigma must be non-negative")
    x_tilde = as_tensor(x_tilde)
    if x_tilde.ndim == 2:
        x_tilde = Tensor(x_tilde.data[:, None, :])
    total_var = as_tensor(v) + sigma * sigma
    return gauss_pdf(x_tilde, z, total_var)


def group_likelihood_binary(
    x_tilde: TensorLike,
    z_prob: TensorLike,
    beta: float,
) -> tuple[Tensor, Tensor]:
    """
    Predicted bit probabilities under bit-flip noise.

    Returns:
        (ξ, ẑ) with ξ = z(1 − 2β) + β and ẑ = x̃ξ + (1 − x̃)(1 − ξ).
    """
    x_tilde = as_tensor(x_tilde)
    if x_tilde.ndim == 2:
        x_tilde = Tensor(x_tilde.data[:, None, :])
    xi = as_tensor(z_prob) * (1.0 - 2.0 * beta) + beta
    z_hat = x_tilde * xi + (1.0 - x_tilde) * (1.0 - xi)
    return xi, z_hat


def delta_z_continuous(
    x_tilde: TensorLike,
    z: TensorLike,
    m: TensorLike,
    z_hat: TensorLike,
) -> Tensor:
    """δz = (x̃ − z) ⊙ m ⊙ ẑ."""
    x_tilde = as_tensor(x_tilde)
    if x_tilde.ndim == 2:
        x_tilde = Tensor(x_tilde.data[:, None, :])
    return (x_tilde - as_tensor(z)) * as_tensor(m) * as_tensor(z_hat)


def delta_z_binary(x_tilde: TensorLike, m: TensorLike, xi: TensorLike) -> Tensor:
    """
    δz = m / (Σ_h ξ_h m_h − 1 + x̃).

    Denominators smaller than 1e-9 in magnitude are pushed to ±1e-9 keeping
    their sign (zero counts as positive); the gradient passes unchanged.
    """
    x_tilde = as_tensor(x_tilde)
    if x_tilde.ndim == 2:
        x_tilde = Tensor(x_tilde.data[:, None, :])
    m = as_tensor(m)
    denom = sum_(as_tensor(xi) * m, axis=GROUP_AXIS, keepdims=True) - 1.0 + x_tilde
    small = np.abs(denom.data) < DENOMINATOR_FLOOR
    if np.any(small):
        target = np.where(denom.data < 0.0, -DENOMINATOR_FLOOR, DENOMINATOR_FLOOR)
        denom = denom + np.where(small, target - denom.data, 0.0)
    return m / denom


def likelihood_ratio(z_hat: TensorLike) -> Tensor:
    """
    L_k = ẑ_k / Σ_h ẑ_h per element.

    Elements where every group has zero likelihood get the uniform 1/K.
    """
    z_hat = as_tensor(z_hat)
    if np.any(z_hat.data < 0.0):
        raise TagError("likelihoods must be non-negative")
    empty = z_hat.data.sum(axis=GROUP_AXIS, keepdims=True) == 0.0
    if np.any(empty):
        z_hat = z_hat + np.broadcast_to(empty, z_hat.dims).astype(np.float64)
    return z_hat / sum_(z_hat, axis=GROUP_AXIS, keepdims=True)


def group_log_likelihood(
    x: TensorLike,
    z: TensorLike,
    mode: InputMode,
    v: TensorLike | None = None,
    z_logits: TensorLike | None = None,
) -> Tensor:
    """log q(x | g_k) of the clean input per group and element."""
    x = as_tensor(x)
    if x.ndim == 2:
        x = Tensor(x.data[:, None, :])
    if mode == "continuous":
        if v is None:
            raise TagError("continuous likelihood needs the group variance v")
        return log_gauss_pdf(x, z, v)

    if z_logits is not None:
        log_p1 = log_sigmoid(z_logits)
        log_p0 = log_sigmoid(-as_tensor(z_logits))
    else:
        log_p1 = log(z)
        log_p0 = log(1.0 - as_tensor(z))
    return x * log_p1 + (1.0 - x) * log_p0


def mixture_cost(
    x: TensorLike,
    z: TensorLike,
    m: TensorLike,
    v: TensorLike | None,
    mode: InputMode,
    *,
    log_m: TensorLike | None = None,
    z_logits: TensorLike | None = None,
) -> Tensor:
    """
    Negative log-likelihood of the clean input under the group mixture.

    C_i = −log Σ_k q(x | g_k) m_k, averaged over batch and elements and
    computed with logsumexp over groups.

    Args:
        x: Clean input [B, N]; never the corrupted one.
        z: Group reconstructions [B, K, N] (probabilities in binary mode).
        m: Group assignments [B, K, N].
        v: Group variance (continuous mode).
        mode: "continuous" or "binary".
        log_m: Log assignments; used instead of log(m) when given, so masks
            with exact zeros (after ablation) stay finite.
        z_logits: Pre-sigmoid reconstructions (binary mode).

    Returns:
        Scalar cost.
    """
    log_lik = group_log_likelihood(x, z, mode, v=v, z_logits=z_logits)
    log_weights = as_tensor(log_m) if log_m is not None else log(m)
    per_element = logsumexp(log_lik + log_weights, axis=GROUP_AXIS)
    return -mean(per_element)


def mixture_expectation(z: TensorLike, m: TensorLike) -> Tensor:
    """q(x) reported as Σ_k m_k E[x | g_k], shape [B, N]."""
    return sum_(as_tensor(m) * as_tensor(z), axis=GROUP_AXIS)


def ablate_group(m_logits: TensorLike, k: int) -> Tensor:
    """
    Suppress one group before the group softmax.

    Args:
        m_logits: Pre-softmax assignments [B, K, N].
        k: Group to remove.

    Returns:
        Assignments with group k at ≈0 and the others renormalized.
    """
    m_logits = as_tensor(m_logits)
    groups = m_logits.dims[GROUP_AXIS]
    if not 0 <= k < groups:
        raise TagError(f"group index {k} out of range for K={groups}")
    return softmax_axis(_ablated_logits(m_logits, k), GROUP_AXIS)


def ablated_log_masks(m_logits: TensorLike, k: int) -> Tensor:
    """Log of ``ablate_group`` computed from the logits."""
    return log_softmax_axis(_ablated_logits(as_tensor(m_logits), k), GROUP_AXIS)


def _ablated_logits(m_logits: Tensor, k: int) -> Tensor:
    selected = np.zeros(m_logits.dims, dtype=bool)
    selected[:, k, :] = True
    return masked_fill(m_logits, selected, ABLATION_LOGIT)


def check_mask_simplex(m: TensorLike, tolerance: float = SIMPLEX_TOLERANCE) -> None:
    """
    Assert m ≥ 0 and Σ_k m_k = 1 per element.

    Raises:
        MaskInvariantError: On any violation.
    """
    data = as_tensor(m).data
    if np.any(data < 0.0) or not np.all(np.isfinite(data)):
        raise MaskInvariantError("group assignments must be finite and non-negative")
    deviation = float(np.max(np.abs(data.sum(axis=GROUP_AXIS) - 1.0), initial=0.0))
    if deviation > tolerance:
        raise MaskInvariantError(f"group assignment sums deviate from 1 by {deviation:.3e}")
