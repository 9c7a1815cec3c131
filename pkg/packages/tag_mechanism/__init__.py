"""TAG mechanism package: corruption, group likelihoods, δz, L(m), cost and the forward loop."""

from packages.tag_mechanism.errors import CorruptionDomainError, MaskInvariantError, TagError
from packages.tag_mechanism.forward import (
    ClassCostIterations,
    class_predictions_per_iteration,
    tagger_forward,
)
from packages.tag_mechanism.mechanism import (
    ABLATION_LOGIT,
    ablate_group,
    ablated_log_masks,
    check_mask_simplex,
    corrupt,
    delta_z_binary,
    delta_z_continuous,
    group_likelihood_binary,
    group_likelihood_continuous,
    group_log_likelihood,
    init_state,
    likelihood_ratio,
    mixture_cost,
    mixture_expectation,
)
from packages.tag_mechanism.models import (
    CorruptionMode,
    CorruptionSpec,
    GroupState,
    InputMode,
    NoiseModelParams,
    Trajectory,
)

__all__ = [
    # Models
    "CorruptionMode",
    "CorruptionSpec",
    "GroupState",
    "InputMode",
    "NoiseModelParams",
    "Trajectory",
    # Iteration pieces
    "ABLATION_LOGIT",
    "ablate_group",
    "ablated_log_masks",
    "check_mask_simplex",
    "corrupt",
    "delta_z_binary",
    "delta_z_continuous",
    "group_likelihood_binary",
    "group_likelihood_continuous",
    "group_log_likelihood",
    "init_state",
    "likelihood_ratio",
    "mixture_cost",
    "mixture_expectation",
    # Forward loop
    "ClassCostIterations",
    "class_predictions_per_iteration",
    "tagger_forward",
    # Errors
    "CorruptionDomainError",
    "MaskInvariantError",
    "TagError",
]
