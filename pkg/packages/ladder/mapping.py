"""
Parametric mapping of one TAG iteration.

Groups are folded into the batch: a [B, K, N] state becomes B·K rows that all
pass through the same weights.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from packages.autodiff import (
    ShapeError,
    Tensor,
    as_tensor,
    concat,
    masked_fill,
    matmul,
    normalize_layer,
    relu,
    reshape,
    sigmoid,
    slice_axis,
    softmax_axis,
    sum_,
)

from .errors import ClassHeadDisabledError
from .models import TaggerParams

ROW_SUM_FLOOR = 1e-12


class ProjectedOutput(NamedTuple):
    """Next-iteration reconstructions and mask logits, each [B, K, N]."""

    z: Tensor
    m_logits: Tensor
    z_logits: Tensor | None


def _normalize(t: Tensor, params: TaggerParams, key: str, training: bool) -> Tensor:
    return normalize_layer(
        t,
        params.config.normalization,
        stats=params.stats.get(key),
        training=training,
    )


def input_projection(
    z: Tensor,
    m: Tensor,
    delta_z: Tensor,
    likelihood: Tensor,
    params: TaggerParams,
    training: bool = True,
) -> Tensor:
    """
    h = relu(norm(W_h [z, m, δz, L(m)])) per group.

    Args:
        z, m, delta_z, likelihood: Group quantities, each [B, K, N].
        params: Model parameters.
        training: Batch statistics are used and recorded when true.

    Returns:
        Hidden representation [B·K, H].

    Raises:
        ShapeError: Inputs disagree in shape or with the configured N.
    """
    inputs = [as_tensor(t) for t in (z, m, delta_z, likelihood)]
    dims = inputs[0].dims
    if len(dims) != 3 or any(t.dims != dims for t in inputs):
        raise ShapeError(f"input_projection needs four equal [B, K, N] inputs, got {[t.dims for t in inputs]}")
    if dims[2] != params.config.input_size:
        raise ShapeError(f"expected N={params.config.input_size}, got {dims[2]}")

    rows = dims[0] * dims[1]
    stacked = concat([reshape(t, (rows, dims[2])) for t in inputs], axis=1)
    pre = matmul(stacked, params["W_h"]) + params["b_h"]
    normed = _normalize(pre, params, "input", training)
    return relu(normed * params["gamma_h"] + params["beta_h"])


def combinator(lateral: Tensor, u: Tensor, params: TaggerParams, level: int) -> tuple[Tensor, Tensor]:
    """
    Gated lateral combinator of one decoder level.

    μ(u) = a1·σ(a2·u + a3) + a4·u + a5
    gate = σ(a6·σ(a7·u + a8) + a9·u + a10)
    û = (lateral − μ) ⊙ gate + μ

    Returns:
        (û, gate)
    """
    a = [params[f"comb{level}.a{i}"] for i in range(1, 11)]
    mu = a[0] * sigmoid(a[1] * u + a[2]) + a[3] * u + a[4]
    gate = sigmoid(a[5] * sigmoid(a[6] * u + a[7]) + a[8] * u + a[9])
    return (lateral - mu) * gate + mu, gate


def ladder_forward(
    h: Tensor,
    params: TaggerParams,
    training: bool = True,
    gates: list[Tensor] | None = None,
) -> tuple[Tensor, Tensor]:
    """
    Ladder encoder/decoder without injected noise or per-layer costs.

    Args:
        h: Output of the input projection [B·K, H].
        params: Model parameters.
        training: Batch statistics are used and recorded when true.
        gates: If given, receives the decoder gate of every level, top first.

    Returns:
        (u, top): decoder output [B·K, H] and top encoder activation.
    """
    depth = params.config.depth
    laterals = [h]
    activation = h
    for level in range(1, depth + 1):
        pre = matmul(activation, params[f"enc{level}.W"])
        normed = _normalize(pre, params, f"enc{level}", training)
        laterals.append(normed)
        activation = relu(normed * params[f"enc{level}.gamma"] + params[f"enc{level}.beta"])
    top = activation

    u = _normalize(top, params, f"dec{depth}", training)
    u_hat, gate = combinator(laterals[depth], u, params, depth)
    if gates is not None:
        gates.append(gate)
    for level in range(depth - 1, -1, -1):
        u = _normalize(matmul(u_hat, params[f"dec{level + 1}.V"]), params, f"dec{level}", training)
        u_hat, gate = combinator(laterals[level], u, params, level)
        if gates is not None:
            gates.append(gate)
    return u_hat, top


def output_projection(u: Tensor, params: TaggerParams, groups: int) -> ProjectedOutput:
    """
    [z, m_logits] = W_u u, split and folded back to [B, K, N].

    Binary mode passes the z part through a logistic sigmoid and keeps the
    logits alongside; the group softmax is left to the caller.
    """
    n = params.config.input_size
    rows = u.dims[0]
    if rows % groups:
        raise ShapeError(f"{rows} rows cannot be split into {groups} groups")
    batch = rows // groups

    out = matmul(u, params["W_u"]) + params["b_u"]
    z_part = reshape(slice_axis(out, 0, n, axis=1), (batch, groups, n))
    m_logits = reshape(slice_axis(out, n, 2 * n, axis=1), (batch, groups, n))
    if params.mode == "binary":
        return ProjectedOutput(z=sigmoid(z_part), m_logits=m_logits, z_logits=z_part)
    return ProjectedOutput(z=z_part, m_logits=m_logits, z_logits=None)


def class_head(top: Tensor, params: TaggerParams, groups: int) -> Tensor:
    """
    Per-group class distribution over C classes plus "no class".

    Returns:
        [B, K, C+1], each row a softmax.

    Raises:
        ClassHeadDisabledError: The model has no class head.
    """
    if not params.has_class_head:
        raise ClassHeadDisabledError("model was built without a class head")
    rows = top.dims[0]
    if rows % groups:
        raise ShapeError(f"{rows} rows cannot be split into {groups} groups")
    hidden = relu(matmul(top, params["cls1.W"]) + params["cls1.b"])
    logits = matmul(hidden, params["cls2.W"]) + params["cls2.b"]
    width = params.config.class_count + 1
    return softmax_axis(reshape(logits, (rows // groups, groups, width)), axis=2)


def combine_class_predictions(per_group: Tensor) -> Tensor:
    """
    Drop the "no class" column, sum over groups and renormalize.

    Rows with total mass below 1e-12 become uniform.

    Returns:
        [B, C] class distribution.
    """
    per_group = as_tensor(per_group)
    if per_group.ndim != 3 or per_group.dims[2] < 2:
        raise ShapeError(f"expected [B, K, C+1] with C >= 1, got {per_group.dims}")
    classes = per_group.dims[2] - 1
    summed = sum_(slice_axis(per_group, 0, classes, axis=2), axis=1)
    totals = sum_(summed, axis=1, keepdims=True)
    degenerate = totals.data < ROW_SUM_FLOOR
    if np.any(degenerate):
        totals = totals + degenerate.astype(np.float64)
    combined = summed / totals
    if np.any(degenerate):
        combined = masked_fill(combined, np.broadcast_to(degenerate, combined.dims), 1.0 / classes)
    return combined
