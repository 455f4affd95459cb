"""Parameter initialisers."""

import math

import numpy as np

from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tensor, resolve_dtype
from sepvote.errors import ShapeError


def he_normal_init(
    rng: Rng, shape: tuple[int, ...], fan_in: int, dtype: str | np.dtype = "f32"
) -> Tensor:
    """
    Draw a trainable tensor from N(0, 2 / fan_in).

    Args:
        rng: Source of randomness.
        shape: Tensor shape.
        fan_in: Number of inputs feeding each output unit.
        dtype: "f32" or "f64".

    Returns:
        Tensor with `requires_grad=True`.

    Raises:
        ValueError: `fan_in` is not positive.
    """
    if fan_in <= 0:
        raise ShapeError(f"fan_in must be positive, got {fan_in}")
    std = math.sqrt(2.0 / fan_in)
    return Tensor(rng.normal(tuple(shape), std, resolve_dtype(dtype)), requires_grad=True)


def constant_init(shape: tuple[int, ...], value: float, dtype: str | np.dtype = "f32",
                  requires_grad: bool = True) -> Tensor:
    return Tensor(np.full(shape, value, dtype=resolve_dtype(dtype)), requires_grad=requires_grad)
