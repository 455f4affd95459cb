"""Elementwise and reduction primitives with backward rules."""

import numpy as np

from sepvote.autodiff.tensor import Tensor, record
from sepvote.errors import ShapeError


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape`, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with numpy broadcasting."""
    out = a.data + b.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record("add", (a, b), out, rule)


def sub(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise difference with numpy broadcasting."""
    out = a.data - b.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record("sub", (a, b), out, rule)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    out = a.data * b.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record("mul", (a, b), out, rule)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply by a constant scalar."""
    out = x.data * x.dtype.type(factor)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * x.dtype.type(factor),)

    return record("scale", (x,), out, rule)


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * out,)

    return record("exp", (x,), out, rule)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * (1 - out * out),)

    return record("tanh", (x,), out, rule)


def sum_all(x: Tensor) -> Tensor:
    """Sum of every element, as a scalar of shape []."""
    out = np.asarray(x.data.sum(), dtype=x.dtype)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.broadcast_to(g, x.shape).astype(x.dtype),)

    return record("sum", (x,), out, rule)


def mean_all(x: Tensor) -> Tensor:
    """Mean of every element, as a scalar of shape []."""
    n = x.size
    out = np.asarray(x.data.mean(), dtype=x.dtype)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.broadcast_to(g / n, x.shape).astype(x.dtype),)

    return record("mean", (x,), out, rule)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Return `x` viewed with a new shape of the same size."""
    try:
        out = x.data.reshape(shape)
    except ValueError as err:
        raise ShapeError(f"Cannot reshape {x.shape} to {shape}") from err

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g.reshape(x.shape),)

    return record("reshape", (x,), out, rule)


def stack_sum(tensors: list[Tensor]) -> Tensor:
    """Sum a non-empty list of same-shape tensors, left to right."""
    if not tensors:
        raise ShapeError("stack_sum needs at least one tensor")
    total = tensors[0]
    for t in tensors[1:]:
        total = add(total, t)
    return total
