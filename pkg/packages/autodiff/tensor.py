"""Tensors and the define-by-run differentiation graph.

A Graph is a tape: while it is active (``with Graph() as graph:``) every
operation whose inputs are tracked appends itself in execution order, which is
already a topological order. ``backward`` walks the tape once in reverse.
Graphs are confined to the context (thread) that entered them.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from contextvars import ContextVar, Token
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ContractError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_active_graph: ContextVar[Graph | None] = ContextVar("active_graph", default=None)


class Tensor:
    """Dense float64 array, optionally a node of the active graph.

    Leaves created with ``requires_grad=True`` are parameters; outputs of
    recorded operations carry the node id assigned by the graph.
    """

    __slots__ = ("data", "name", "node_id", "requires_grad")
    __array_priority__ = 1000

    def __init__(
        self,
        data: Any,
        *,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        self.data: np.ndarray = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.node_id: int | None = None

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def tracked(self) -> bool:
        """True if gradients flow into this tensor."""
        return self.requires_grad or self.node_id is not None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single value, tensor has dims {self.dims}")
        return float(self.data.reshape(()))

    def detach(self) -> Tensor:
        """Untracked tensor sharing no graph history."""
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(dims={self.dims}{label}, requires_grad={self.requires_grad})"


@dataclass(frozen=True)
class Operation:
    """One recorded operation: inputs, output and its local gradient rule."""

    name: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Graph:
    """Ordered record of operations for one forward pass."""

    def __init__(self) -> None:
        self.operations: list[Operation] = []
        self._token: Token[Graph | None] | None = None

    def record(
        self,
        name: str,
        inputs: tuple[Tensor, ...],
        output: Tensor,
        backward: BackwardFn,
    ) -> None:
        output.node_id = len(self.operations)
        self.operations.append(Operation(name, inputs, output, backward))

    def __len__(self) -> int:
        return len(self.operations)

    def __enter__(self) -> Graph:
        self._token = _active_graph.set(self)
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._token is not None:
            _active_graph.reset(self._token)
            self._token = None


def current_graph() -> Graph | None:
    """The graph recording in this context, if any."""
    return _active_graph.get()


def backward(
    graph: Graph,
    loss: Tensor,
    parameters: Mapping[str, Tensor],
) -> dict[str, np.ndarray]:
    """
    Reverse-mode pass from a scalar loss.

    Args:
        graph: Graph the loss was computed in.
        loss: Scalar tensor.
        parameters: Named leaves to collect gradients for.

    Returns:
        Gradient per parameter name; parameters the loss does not reach get zeros.

    Raises:
        ContractError: If the loss is not a scalar.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got dims {loss.dims}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for op in reversed(graph.operations):
        upstream = grads.pop(id(op.output), None)
        if upstream is None:
            continue
        local = op.backward(upstream)
        for tensor, grad in zip(op.inputs, local, strict=True):
            if grad is None or not tensor.tracked:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = grad

    return {
        name: np.array(grads[id(p)], dtype=np.float64) if id(p) in grads else np.zeros_like(p.data)
        for name, p in parameters.items()
    }
