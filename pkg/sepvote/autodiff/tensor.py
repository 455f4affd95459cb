"""Dense tensors and the operation tape used for reverse-mode differentiation."""

from __future__ import annotations

import itertools
import os
from collections.abc import Callable, Sequence
from contextvars import ContextVar, Token
from dataclasses import dataclass

import numpy as np

from sepvote.errors import InvariantError, ShapeError

DTYPES: dict[str, type[np.floating]] = {"f32": np.float32, "f64": np.float64}

# Finite-value assertions after every recorded op; enabled with SEPVOTE_DEBUG=1.
CHECK_FINITE = os.getenv("SEPVOTE_DEBUG", "0") == "1"

_tensor_ids = itertools.count(1)

BackwardRule = Callable[[np.ndarray], Sequence[np.ndarray | None]]


def resolve_dtype(dtype: str | np.dtype | type | None) -> np.dtype:
    """
    Map a dtype spelling ("f32", "f64", or a numpy dtype) to a numpy float dtype.

    Raises:
        ValueError: The dtype is not one of the supported float types.
    """
    if dtype is None:
        return np.dtype(np.float32)
    if isinstance(dtype, str) and dtype in DTYPES:
        return np.dtype(DTYPES[dtype])
    resolved = np.dtype(dtype)
    if resolved not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ShapeError(f"Unsupported dtype: {dtype!r}. Expected one of {sorted(DTYPES)}")
    return resolved


def dtype_name(dtype: np.dtype) -> str:
    """Return the short name ("f32" or "f64") of a numpy float dtype."""
    return "f64" if np.dtype(dtype) == np.float64 else "f32"


class Tensor:
    """
    Dense N-d array with an optional gradient slot.

    Attributes:
        data: Row-major contiguous values (float32 or float64).
        requires_grad: Whether gradients should be computed for this tensor.
        grad: Gradient buffer written by `backward`, same shape as `data`.
        id: Process-unique identifier used to key gradient maps.
        name: Optional label, used for parameters.
    """

    __slots__ = ("data", "requires_grad", "grad", "id", "name")

    def __init__(
        self,
        data: np.ndarray | Sequence | float,
        requires_grad: bool = False,
        dtype: str | np.dtype | None = None,
        name: str | None = None,
    ) -> None:
        if dtype is None and isinstance(data, np.ndarray) and data.dtype in (
            np.float32,
            np.float64,
        ):
            target = data.dtype
        else:
            target = resolve_dtype(dtype)
        self.data: np.ndarray = np.ascontiguousarray(data, dtype=target)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.id: int = next(_tensor_ids)
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying values."""
        return self.data.copy()

    def detach(self) -> Tensor:
        """Return a constant tensor sharing no state with the graph."""
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        req = ", requires_grad=True" if self.requires_grad else ""
        nm = f", name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={dtype_name(self.dtype)}{req}{nm})"


@dataclass(frozen=True)
class Node:
    """
    One recorded operation.

    Attributes:
        op: Operation name, for debugging.
        inputs: Tensors consumed by the op, in argument order.
        output: Tensor produced by the op.
        backward: Maps d(loss)/d(output) to one gradient (or None) per input.
    """

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


_active_tape: ContextVar[Tape | None] = ContextVar("sepvote_active_tape", default=None)


class Tape:
    """
    Ordered record of differentiable operations.

    Recording order is a valid topological order, so `backward` replays nodes in reverse. A tape
    is bound to the current context with `with Tape() as tape:`; the binding lives in a
    `ContextVar`, so threads running separate sessions never see each other's tape.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._producer: dict[int, int] = {}
        self._token: Token | None = None

    def __enter__(self) -> Tape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._token is not None:
            _active_tape.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, tensor_id: int) -> bool:
        return tensor_id in self._producer

    def append(self, node: Node) -> None:
        self._producer[node.output.id] = len(self.nodes)
        self.nodes.append(node)

    def producer_index(self, tensor_id: int) -> int:
        """
        Return the index of the node that produced `tensor_id`.

        Raises:
            ValueError: The tensor was not produced on this tape.
        """
        try:
            return self._producer[tensor_id]
        except KeyError:
            raise ShapeError(f"Tensor id {tensor_id} is not on the tape") from None


def active_tape() -> Tape | None:
    """Return the tape bound to the current context, if any."""
    return _active_tape.get()


def record(op: str, inputs: Sequence[Tensor], out_data: np.ndarray, rule: BackwardRule) -> Tensor:
    """
    Wrap `out_data` in a Tensor and record the op on the active tape.

    Nothing is recorded when no tape is active or when none of the inputs requires a gradient;
    the returned tensor is then a constant.

    Args:
        op: Operation name.
        inputs: Input tensors, in the order the backward rule returns their gradients.
        out_data: Forward result.
        rule: Backward rule for the op.

    Returns:
        The output tensor.
    """
    out = Tensor(out_data)
    if CHECK_FINITE and not np.all(np.isfinite(out.data)):
        raise InvariantError(f"Non-finite values produced by '{op}'")
    tape = _active_tape.get()
    if tape is None or not any(t.requires_grad for t in inputs):
        return out
    out.requires_grad = True
    tape.append(Node(op=op, inputs=tuple(inputs), output=out, backward=rule))
    return out


def backward(tape: Tape, loss: Tensor | int) -> dict[int, Tensor]:
    """
    Back-propagate from a scalar loss through the tape.

    Args:
        tape: Tape the loss was computed on.
        loss: The loss tensor or its id.

    Returns:
        Map from tensor id to d(loss)/d(tensor) for every leaf tensor on the tape that requires a
        gradient. Leaves that do not influence the loss get exact zeros; constants are absent.
        Each leaf's `grad` slot is set to the same values.

    Raises:
        ValueError: The loss is not a scalar or is not on the tape.
    """
    loss_id = loss if isinstance(loss, int) else loss.id
    last = tape.producer_index(loss_id)
    loss_tensor = tape.nodes[last].output
    if loss_tensor.size != 1 or loss_tensor.ndim > 1:
        raise ShapeError(f"Loss must be a scalar, got shape {loss_tensor.shape}")

    grads: dict[int, np.ndarray] = {loss_id: np.ones_like(loss_tensor.data)}
    for node in reversed(tape.nodes[: last + 1]):
        g = grads.pop(node.output.id, None)
        if g is None:
            continue
        input_grads = node.backward(g)
        for tensor, gi in zip(node.inputs, input_grads, strict=True):
            if gi is None or not tensor.requires_grad:
                continue
            if gi.shape != tensor.shape:
                raise InvariantError(
                    f"Backward of '{node.op}' returned shape {gi.shape} for input {tensor.shape}"
                )
            if tensor.id in grads:
                grads[tensor.id] = grads[tensor.id] + gi
            else:
                grads[tensor.id] = gi

    result: dict[int, Tensor] = {}
    for node in tape.nodes[: last + 1]:
        for tensor in node.inputs:
            if not tensor.requires_grad or tensor.id in tape or tensor.id in result:
                continue
            g = grads.get(tensor.id)
            value = np.zeros_like(tensor.data) if g is None else g.astype(tensor.dtype, copy=False)
            tensor.grad = value
            result[tensor.id] = Tensor(value)
    return result
