"""Differentiable tensor operations.

Every function computes its result with numpy and, when a graph is active and
any input is tracked, records a local gradient rule. Binary operations follow
numpy broadcasting; gradients are summed back to each operand's shape.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from typing import Any, Literal

import numpy as np
from scipy.special import expit

from .errors import DomainError, ShapeError
from .tensor import BackwardFn, Tensor, current_graph

TensorLike = Tensor | np.ndarray | float | int

ReduceOp = Literal["sum", "mean", "logsumexp"]


def as_tensor(value: TensorLike) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


def _emit(name: str, inputs: tuple[Tensor, ...], data: np.ndarray, rule: BackwardFn) -> Tensor:
    out = Tensor(data)
    graph = current_graph()
    if graph is not None and any(t.tracked for t in inputs):
        graph.record(name, inputs, out, rule)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(name: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.dims, b.dims)
    except ValueError as e:
        raise ShapeError(f"{name}: dims {a.dims} and {b.dims} do not broadcast") from e


def _normalize_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise ShapeError(f"axis {axis} is invalid for a {ndim}-dimensional tensor")
    return axis % ndim


# ---------------------------------------------------------------------------
# Binary arithmetic
# ---------------------------------------------------------------------------


def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.dims), _unbroadcast(g, b.dims)

    return _emit("add", (a, b), a.data + b.data, rule)


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.dims), _unbroadcast(-g, b.dims)

    return _emit("sub", (a, b), a.data - b.data, rule)


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b.data, a.dims), _unbroadcast(g * a.data, b.dims)

    return _emit("mul", (a, b), a.data * b.data, rule)


def div(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("div", a, b)
    if np.any(b.data == 0.0):
        raise DomainError("div: division by zero")
    out = a.data / b.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g / b.data, a.dims), _unbroadcast(-g * out / b.data, b.dims)

    return _emit("div", (a, b), out, rule)


def neg(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    return _emit("neg", (a,), -a.data, lambda g: (-g,))


# ---------------------------------------------------------------------------
# Unary elementwise
# ---------------------------------------------------------------------------


def log(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data <= 0.0):
        raise DomainError("log: argument must be positive")
    return _emit("log", (a,), np.log(a.data), lambda g: (g / a.data,))


def exp(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    return _emit("exp", (a,), out, lambda g: (g * out,))


def sigmoid(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    out = expit(a.data)
    return _emit("sigmoid", (a,), out, lambda g: (g * out * (1.0 - out),))


def log_sigmoid(a: TensorLike) -> Tensor:
    """log(sigmoid(a)) without overflow."""
    a = as_tensor(a)
    out = -np.logaddexp(0.0, -a.data)
    return _emit("log_sigmoid", (a,), out, lambda g: (g * expit(-a.data),))


def relu(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    active = a.data > 0.0
    return _emit("relu", (a,), np.where(active, a.data, 0.0), lambda g: (g * active,))


def square(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    return _emit("square", (a,), a.data * a.data, lambda g: (2.0 * g * a.data,))


def sqrt(a: TensorLike) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data < 0.0):
        raise DomainError("sqrt: argument must be non-negative")
    out = np.sqrt(a.data)
    return _emit("sqrt", (a,), out, lambda g: (0.5 * g / out,))


def clamp_min(a: TensorLike, floor: float) -> Tensor:
    """max(a, floor); gradient passes where a is above the floor."""
    a = as_tensor(a)
    above = a.data > floor
    return _emit("clamp_min", (a,), np.where(above, a.data, floor), lambda g: (g * above,))


def gauss_pdf(x: TensorLike, mean: TensorLike, var: TensorLike) -> Tensor:
    """Density of N(mean, var) at x, elementwise."""
    x, mean, var = as_tensor(x), as_tensor(mean), as_tensor(var)
    if np.any(var.data <= 0.0):
        raise DomainError("gauss_pdf: variance must be positive")
    diff = x.data - mean.data
    out = np.exp(-diff * diff / (2.0 * var.data)) / np.sqrt(2.0 * math.pi * var.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d_mean = g * out * diff / var.data
        d_var = g * out * (diff * diff / (2.0 * var.data**2) - 0.5 / var.data)
        return (
            _unbroadcast(-d_mean, x.dims),
            _unbroadcast(d_mean, mean.dims),
            _unbroadcast(d_var, var.dims),
        )

    return _emit("gauss_pdf", (x, mean, var), out, rule)


def log_gauss_pdf(x: TensorLike, mean: TensorLike, var: TensorLike) -> Tensor:
    """Log density of N(mean, var) at x, elementwise."""
    x, mean, var = as_tensor(x), as_tensor(mean), as_tensor(var)
    if np.any(var.data <= 0.0):
        raise DomainError("log_gauss_pdf: variance must be positive")
    diff = x.data - mean.data
    out = -0.5 * np.log(2.0 * math.pi * var.data) - diff * diff / (2.0 * var.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d_mean = g * diff / var.data
        d_var = g * (diff * diff / (2.0 * var.data**2) - 0.5 / var.data)
        return (
            _unbroadcast(-d_mean, x.dims),
            _unbroadcast(d_mean, mean.dims),
            _unbroadcast(d_var, var.dims),
        )

    return _emit("log_gauss_pdf", (x, mean, var), out, rule)


_ELEMENTWISE: dict[str, Callable[..., Tensor]] = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "neg": neg,
    "log": log,
    "exp": exp,
    "sigmoid": sigmoid,
    "log_sigmoid": log_sigmoid,
    "relu": relu,
    "square": square,
    "sqrt": sqrt,
    "gauss_pdf": gauss_pdf,
    "log_gauss_pdf": log_gauss_pdf,
}


def elementwise(op: str, *args: TensorLike) -> Tensor:
    """Dispatch an elementwise operation by name."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"Unknown elementwise op '{op}'; expected one of {sorted(_ELEMENTWISE)}") from None
    return fn(*args)


# ---------------------------------------------------------------------------
# Linear algebra, reductions, softmax
# ---------------------------------------------------------------------------


def matmul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul: expected 2-d operands, got {a.dims} and {b.dims}")
    if a.dims[1] != b.dims[0]:
        raise ShapeError(f"matmul: inner dims differ ({a.dims} · {b.dims})")

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g @ b.data.T, a.data.T @ g

    return _emit("matmul", (a, b), a.data @ b.data, rule)


def _expand(g: np.ndarray, axis: int | None, keepdims: bool, shape: tuple[int, ...]) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def reduce(op: ReduceOp, t: TensorLike, axis: int | None = None, keepdims: bool = False) -> Tensor:
    """Sum, mean or log-sum-exp over one axis (or all values when axis is None)."""
    t = as_tensor(t)
    if axis is not None:
        axis = _normalize_axis(axis, t.ndim)
    shape = t.dims

    if op == "sum":
        out = t.data.sum(axis=axis, keepdims=keepdims)
        return _emit("sum", (t,), out, lambda g: (_expand(g, axis, keepdims, shape).copy(),))

    if op == "mean":
        count = t.data.size if axis is None else shape[axis]
        out = t.data.mean(axis=axis, keepdims=keepdims)
        return _emit(
            "mean", (t,), out, lambda g: (_expand(g, axis, keepdims, shape) / count,)
        )

    if op == "logsumexp":
        peak = t.data.max(axis=axis, keepdims=True)
        peak = np.where(np.isfinite(peak), peak, 0.0)
        kept = peak + np.log(np.exp(t.data - peak).sum(axis=axis, keepdims=True))
        out = kept if keepdims else (kept.reshape(()) if axis is None else np.squeeze(kept, axis))
        weights = np.exp(t.data - kept)
        return _emit(
            "logsumexp",
            (t,),
            np.asarray(out),
            lambda g: (_expand(g, axis, keepdims, shape) * weights,),
        )

    raise ValueError(f"Unknown reduction '{op}'")


def sum(t: TensorLike, axis: int | None = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return reduce("sum", t, axis, keepdims)


def mean(t: TensorLike, axis: int | None = None, keepdims: bool = False) -> Tensor:
    return reduce("mean", t, axis, keepdims)


def logsumexp(t: TensorLike, axis: int | None = None, keepdims: bool = False) -> Tensor:
    return reduce("logsumexp", t, axis, keepdims)


def softmax_axis(t: TensorLike, axis: int) -> Tensor:
    """Softmax along one axis, max-subtracted."""
    t = as_tensor(t)
    axis = _normalize_axis(axis, t.ndim)
    shifted = t.data - t.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _emit("softmax", (t,), out, rule)


def log_softmax_axis(t: TensorLike, axis: int) -> Tensor:
    """Log of softmax along one axis, max-subtracted."""
    t = as_tensor(t)
    axis = _normalize_axis(axis, t.ndim)
    shifted = t.data - t.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    probs = np.exp(out)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return _emit("log_softmax", (t,), out, rule)


# ---------------------------------------------------------------------------
# Shape manipulation
# ---------------------------------------------------------------------------


def reshape(t: TensorLike, dims: Sequence[int]) -> Tensor:
    t = as_tensor(t)
    try:
        out = t.data.reshape(tuple(dims))
    except ValueError as e:
        raise ShapeError(f"reshape: cannot view {t.dims} as {tuple(dims)}") from e
    return _emit("reshape", (t,), out, lambda g: (g.reshape(t.dims),))


def concat(tensors: Sequence[TensorLike], axis: int) -> Tensor:
    parts = tuple(as_tensor(t) for t in tensors)
    if not parts:
        raise ShapeError("concat: nothing to concatenate")
    axis = _normalize_axis(axis, parts[0].ndim)
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: incompatible dims {[p.dims for p in parts]}") from e
    bounds = np.cumsum([p.dims[axis] for p in parts])[:-1]

    def rule(g: np.ndarray) -> list[np.ndarray]:
        return np.split(g, bounds, axis=axis)

    return _emit("concat", parts, out, rule)


def slice_axis(t: TensorLike, start: int, stop: int, axis: int) -> Tensor:
    """Contiguous slice [start, stop) along one axis."""
    t = as_tensor(t)
    axis = _normalize_axis(axis, t.ndim)
    if not 0 <= start < stop <= t.dims[axis]:
        raise ShapeError(f"slice [{start}, {stop}) is out of range for axis {axis} of {t.dims}")
    index: list[Any] = [slice(None)] * t.ndim
    index[axis] = slice(start, stop)
    key = tuple(index)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(t.dims)
        full[key] = g
        return (full,)

    return _emit("slice", (t,), t.data[key], rule)


def masked_fill(t: TensorLike, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where mask is true with a constant; no gradient flows there."""
    t = as_tensor(t)
    try:
        keep = ~np.broadcast_to(np.asarray(mask, dtype=bool), t.dims)
    except ValueError as e:
        raise ShapeError(f"masked_fill: mask does not broadcast to {t.dims}") from e
    return _emit("masked_fill", (t,), np.where(keep, t.data, value), lambda g: (g * keep,))


def _install_operators() -> None:
    def radd(self: Tensor, other: TensorLike) -> Tensor:
        return add(other, self)

    def rsub(self: Tensor, other: TensorLike) -> Tensor:
        return sub(other, self)

    def rmul(self: Tensor, other: TensorLike) -> Tensor:
        return mul(other, self)

    def rdiv(self: Tensor, other: TensorLike) -> Tensor:
        return div(other, self)

    Tensor.__add__ = add  # type: ignore[method-assign,assignment]
    Tensor.__radd__ = radd  # type: ignore[attr-defined]
    Tensor.__sub__ = sub  # type: ignore[method-assign,assignment]
    Tensor.__rsub__ = rsub  # type: ignore[attr-defined]
    Tensor.__mul__ = mul  # type: ignore[method-assign,assignment]
    Tensor.__rmul__ = rmul  # type: ignore[attr-defined]
    Tensor.__truediv__ = div  # type: ignore[method-assign,assignment]
    Tensor.__rtruediv__ = rdiv  # type: ignore[attr-defined]
    Tensor.__neg__ = neg  # type: ignore[method-assign,assignment]
    Tensor.__matmul__ = matmul  # type: ignore[method-assign,assignment]


_install_operators()
