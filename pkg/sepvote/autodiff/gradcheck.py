"""Finite-difference verification of backward rules."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from sepvote.autodiff.ops import mul, sum_all
from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tape, Tensor, backward

ABSOLUTE_FLOOR = 1e-8


@dataclass(frozen=True)
class GradCheckReport:
    """
    Outcome of a gradient check.

    Attributes:
        passed: True when `max_error` is within the tolerance.
        max_error: Largest per-element error (relative, or absolute for tiny values).
        worst_input: Index of the input holding the worst element.
        worst_index: Flat index of the worst element within that input.
        checked: Number of elements compared.
        tolerance: Tolerance the check was run with.
    """

    passed: bool
    max_error: float
    worst_input: int
    worst_index: int
    checked: int
    tolerance: float


def _element_error(analytic: float, numeric: float) -> float:
    a, n = abs(analytic), abs(numeric)
    if a < ABSOLUTE_FLOOR and n < ABSOLUTE_FLOOR:
        return abs(analytic - numeric)
    return abs(analytic - numeric) / max(a, n)


def grad_check(
    fn: Callable[..., Tensor],
    inputs: Tensor | Sequence[Tensor],
    tolerance: float = 1e-4,
    step: float = 1e-5,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare tape gradients of `fn` against central finite differences in float64.

    Non-scalar outputs are reduced with a fixed random projection, so every output element
    contributes to the checked gradient.

    Args:
        fn: Operation under test; called with the input tensors as positional arguments.
        inputs: One tensor or a sequence of tensors. They are converted to float64 copies.
        tolerance: Maximum accepted error.
        step: Central-difference step.
        seed: Seed for the output projection.

    Returns:
        A report; it is always returned, whether the check passes or not.
    """
    originals = [inputs] if isinstance(inputs, Tensor) else list(inputs)
    tensors = [Tensor(t.data.astype(np.float64), requires_grad=True) for t in originals]

    probe = fn(*tensors)
    weights = Tensor(Rng(seed).normal(probe.shape, 1.0, np.float64))

    def objective() -> Tensor:
        out = fn(*tensors)
        return out if out.size == 1 and out.ndim <= 1 else sum_all(mul(out, weights))

    with Tape() as tape:
        loss = objective()
    analytic = backward(tape, loss)

    worst = (0.0, 0, 0)
    checked = 0
    for k, tensor in enumerate(tensors):
        grad = analytic[tensor.id].data.reshape(-1)
        flat = tensor.data.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            plus = objective().item()
            flat[i] = saved - step
            minus = objective().item()
            flat[i] = saved
            numeric = (plus - minus) / (2 * step)
            err = _element_error(float(grad[i]), numeric)
            checked += 1
            if err > worst[0]:
                worst = (err, k, i)

    return GradCheckReport(
        passed=worst[0] <= tolerance,
        max_error=worst[0],
        worst_input=worst[1],
        worst_index=worst[2],
        checked=checked,
        tolerance=tolerance,
    )
