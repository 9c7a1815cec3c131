"""The unrolled T-iteration Tagger forward pass."""

from __future__ import annotations

from typing import Literal

import numpy as np

from packages.autodiff import ShapeError, Tensor, as_tensor, log_softmax_axis, softmax_axis
from packages.autodiff.ops import TensorLike
from packages.ladder import (
    TaggerParams,
    class_head,
    combine_class_predictions,
    input_projection,
    ladder_forward,
    output_projection,
)
from packages.tagger_settings import get_tagger_settings

from .errors import TagError
from .mechanism import (
    GROUP_AXIS,
    ablate_group,
    ablated_log_masks,
    check_mask_simplex,
    corrupt,
    delta_z_binary,
    delta_z_continuous,
    group_likelihood_binary,
    group_likelihood_continuous,
    init_state,
    likelihood_ratio,
    mixture_cost,
    mixture_expectation,
)
from .models import CorruptionSpec, GroupState, InputMode, NoiseModelParams, Trajectory

ClassCostIterations = Literal["last", "all"]


def tagger_forward(
    x: TensorLike,
    params: TaggerParams,
    K: int,
    T: int,
    spec: CorruptionSpec,
    mode: InputMode | None = None,
    training: bool = True,
    rng: np.random.Generator | None = None,
    *,
    corrupted: TensorLike | None = None,
    init: GroupState | None = None,
    ablate: int | None = None,
    eval_keep_sigma: bool = True,
    with_class_head: bool = False,
    class_cost_iterations: ClassCostIterations = "last",
    debug_invariants: bool | None = None,
) -> Trajectory:
    """
    Run T grouping iterations on a batch.

    Training corrupts ``x`` once; evaluation feeds the clean input as x̃ while
    σ (or β) still enters the likelihood terms. Everything the network sees is
    derived from x̃; the clean input only enters the cost.

    Args:
        x: Clean input [B, N].
        params: Model parameters, shared by all groups and iterations.
        K: Number of groups; may differ from the one used in training.
        T: Number of iterations; may differ from the one used in training.
        spec: Corruption process.
        mode: Likelihood family; defaults to the one matching ``spec``.
        training: Corrupt the input and use batch statistics.
        rng: Random stream for corruption and initial masks.
        corrupted: Use this x̃ instead of drawing one.
        init: Use this initial state instead of drawing one.
        ablate: Group removed before the final softmax of the last iteration.
        eval_keep_sigma: When false, evaluation uses σ = 0 in v + σ², or
            β = 0 in the binary likelihood.
        with_class_head: Record per-group class distributions.
        class_cost_iterations: Record them at the last iteration or at all.
        debug_invariants: Check the mask simplex after every iteration;
            defaults to the process setting.

    Returns:
        Trajectory with T+1 states and T cost terms.

    Raises:
        TagError: Invalid K, T, mode or ablation index, or a missing rng.
        ShapeError: Input or initial state of the wrong shape.
    """
    if K < 1 or T < 1:
        raise TagError(f"need K >= 1 and T >= 1, got K={K}, T={T}")
    mode = mode or spec.input_mode
    if mode != spec.input_mode or mode != params.mode:
        raise TagError(
            f"mode '{mode}' disagrees with corruption '{spec.mode.value}' or model '{params.mode}'"
        )
    if ablate is not None and not 0 <= ablate < K:
        raise TagError(f"cannot ablate group {ablate} of K={K}")
    if debug_invariants is None:
        debug_invariants = get_tagger_settings().debug_invariants

    x = as_tensor(x)
    n = params.config.input_size
    if x.ndim != 2 or x.dims[1] != n:
        raise ShapeError(f"expected input [B, {n}], got {x.dims}")
    batch = x.dims[0]

    if (corrupted is None and training) or init is None:
        if rng is None:
            raise TagError("a random stream is needed to corrupt or initialize")

    if corrupted is not None:
        x_tilde = as_tensor(corrupted)
        if x_tilde.dims != x.dims:
            raise ShapeError(f"corrupted input has dims {x_tilde.dims}, expected {x.dims}")
    elif training:
        assert rng is not None
        x_tilde = corrupt(x, spec, rng)
    else:
        x_tilde = x.detach()

    if init is None:
        assert rng is not None
        state = init_state(batch, K, n, params.data_mean, rng)
    else:
        if init.z.dims != (batch, K, n) or init.m.dims != (batch, K, n):
            raise ShapeError(f"initial state must be [{batch}, {K}, {n}], got {init.z.dims}")
        state = init

    sigma = spec.sigma or 0.0
    beta = spec.beta or 0.0
    if not training and not eval_keep_sigma:
        sigma = beta = 0.0
    v = NoiseModelParams(params.log_v).v if mode == "continuous" and params.log_v is not None else None
    if mode == "continuous" and v is None:
        raise TagError("continuous model is missing its variance parameter")

    trajectory = Trajectory(corrupted=x_tilde, states=[state])
    for i in range(T):
        if mode == "continuous":
            assert v is not None
            z_hat = group_likelihood_continuous(x_tilde, state.z, v, sigma)
            delta_z = delta_z_continuous(x_tilde, state.z, state.m, z_hat)
        else:
            xi, z_hat = group_likelihood_binary(x_tilde, state.z, beta)
            delta_z = delta_z_binary(x_tilde, state.m, xi)
        ratio = likelihood_ratio(z_hat)

        h = input_projection(state.z, state.m, delta_z, ratio, params, training)
        u, top = ladder_forward(h, params, training)
        out = output_projection(u, params, K)

        last = i == T - 1
        if ablate is not None and last:
            m = ablate_group(out.m_logits, ablate)
            log_m = ablated_log_masks(out.m_logits, ablate)
        else:
            m = softmax_axis(out.m_logits, GROUP_AXIS)
            log_m = log_softmax_axis(out.m_logits, GROUP_AXIS)
        if __debug__ and debug_invariants:
            check_mask_simplex(m)

        cost = mixture_cost(x, out.z, m, v, mode, log_m=log_m, z_logits=out.z_logits)
        state = GroupState(
            z=out.z,
            m=m,
            iteration=i + 1,
            z_logits=out.z_logits,
            m_logits=out.m_logits,
        )
        trajectory.states.append(state)
        trajectory.costs.append(cost)
        trajectory.reconstructions.append(mixture_expectation(out.z, m))

        if with_class_head and (last or class_cost_iterations == "all"):
            trajectory.class_outputs.append(class_head(top, params, K))

    if trajectory.class_outputs:
        trajectory.class_predictions = combine_class_predictions(trajectory.class_outputs[-1])
    return trajectory


def class_predictions_per_iteration(trajectory: Trajectory) -> list[Tensor]:
    """Combined [B, C] predictions for every recorded class output."""
    return [combine_class_predictions(per_group) for per_group in trajectory.class_outputs]
