"""Cross-entropy losses for single heads and voting ensembles."""

import numpy as np

from sepvote.autodiff.ops import stack_sum
from sepvote.autodiff.tensor import Tensor, record
from sepvote.data.batching import Batch
from sepvote.errors import ShapeError
from sepvote.models.base import Detector

PROB_FLOOR = 1e-12


def _labels(labels: int | np.ndarray, n: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(labels))
    if arr.shape != (n,):
        raise ShapeError(f"Expected {n} labels, got shape {arr.shape}")
    if not np.all(np.isin(arr, (0, 1))):
        raise ShapeError(f"Labels must be 0 or 1, got {sorted(set(arr.tolist()))}")
    return arr.astype(np.int64)


def cross_entropy(probs: Tensor, labels: int | np.ndarray) -> Tensor:
    """
    Mean of -log(max(p[label], 1e-12)) over the samples of `probs`.

    Args:
        probs: Softmax output `[2]` for one sample or `[n, 2]` for a batch.
        labels: One label, or `n` labels in {0, 1}.

    Returns:
        Scalar loss tensor.

    Raises:
        ValueError: A label is outside {0, 1} or the counts do not match.
    """
    if probs.ndim == 1:
        p2 = probs.data[None, :]
    elif probs.ndim == 2:
        p2 = probs.data
    else:
        raise ShapeError(f"Expected probabilities of shape [2] or [n, 2], got {probs.shape}")
    n = p2.shape[0]
    y = _labels(labels, n)
    picked = p2[np.arange(n), y]
    clamped = np.maximum(picked, PROB_FLOOR)
    out = np.asarray(-np.log(clamped).sum() / n, dtype=probs.dtype)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(p2)
        live = picked >= PROB_FLOOR
        grad[np.arange(n)[live], y[live]] = -1.0 / picked[live] / n
        return ((grad * g).reshape(probs.shape).astype(probs.dtype),)

    return record("cross_entropy", (probs,), out, rule)


def summed_cross_entropy(head_probs: list[Tensor], labels: np.ndarray) -> Tensor:
    """
    Mean over samples of the sum of per-head cross-entropies; every head is supervised with the
    image label.

    Raises:
        ValueError: `head_probs` is empty.
    """
    if not head_probs:
        raise ShapeError("summed_cross_entropy needs at least one head")
    return stack_sum([cross_entropy(p, labels) for p in head_probs])


def ensemble_loss(model: Detector, batch: Batch, training: bool = True) -> Tensor:
    """
    Forward `batch` through every head of `model` and return `summed_cross_entropy`.

    Raises:
        ValueError: The batch is empty.
    """
    if len(batch) == 0:
        raise ShapeError("ensemble_loss needs a non-empty batch")
    x = Tensor(batch.images, dtype=model.dtype)
    return summed_cross_entropy(model.forward(x, training), batch.labels)
