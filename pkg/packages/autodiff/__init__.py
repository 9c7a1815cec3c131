"""
Autodiff package.

Dense float64 tensors with define-by-run reverse-mode differentiation,
enough to express the Tagger forward pass and train it through time.
"""

from .errors import AutodiffError, ContractError, DomainError, ShapeError
from .norm import NormMode, RunningStats, normalize_layer
from .ops import (
    add,
    as_tensor,
    clamp_min,
    concat,
    div,
    elementwise,
    exp,
    gauss_pdf,
    log,
    log_gauss_pdf,
    log_sigmoid,
    log_softmax_axis,
    logsumexp,
    masked_fill,
    matmul,
    mean,
    mul,
    neg,
    reduce,
    relu,
    reshape,
    sigmoid,
    slice_axis,
    softmax_axis,
    sqrt,
    square,
    sub,
)
from .ops import sum as sum_  # noqa: A004
from .rng import Stream, make_rng
from .tensor import Graph, Operation, Tensor, backward, current_graph

__all__ = [
    "AutodiffError",
    "ContractError",
    "DomainError",
    "Graph",
    "NormMode",
    "Operation",
    "RunningStats",
    "ShapeError",
    "Stream",
    "Tensor",
    "add",
    "as_tensor",
    "backward",
    "clamp_min",
    "concat",
    "current_graph",
    "div",
    "elementwise",
    "exp",
    "gauss_pdf",
    "log",
    "log_gauss_pdf",
    "log_sigmoid",
    "log_softmax_axis",
    "logsumexp",
    "make_rng",
    "masked_fill",
    "matmul",
    "mean",
    "mul",
    "neg",
    "normalize_layer",
    "reduce",
    "relu",
    "reshape",
    "sigmoid",
    "slice_axis",
    "softmax_axis",
    "sqrt",
    "square",
    "sub",
    "sum_",
]
