"""Ladder package: the Tagger's parametric mapping and its parameters."""

from packages.ladder.errors import ClassHeadDisabledError, LadderError
from packages.ladder.mapping import (
    ProjectedOutput,
    class_head,
    combinator,
    combine_class_predictions,
    input_projection,
    ladder_forward,
    output_projection,
)
from packages.ladder.models import INITIAL_VARIANCE, InputMode, LadderConfig, TaggerParams

__all__ = [
    # Models
    "INITIAL_VARIANCE",
    "InputMode",
    "LadderConfig",
    "TaggerParams",
    # Mapping
    "ProjectedOutput",
    "class_head",
    "combinator",
    "combine_class_predictions",
    "input_projection",
    "ladder_forward",
    "output_projection",
    # Errors
    "ClassHeadDisabledError",
    "LadderError",
]
