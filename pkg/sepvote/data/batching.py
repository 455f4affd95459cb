"""Seeded mini-batch iteration."""

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from sepvote.autodiff.rng import Rng
from sepvote.data.dataset import Dataset
from sepvote.errors import ShapeError


@dataclass(frozen=True)
class Batch:
    """
    One immutable mini-batch.

    Attributes:
        images: `[n, h, w, 3]` values in [0, 1]; read-only.
        labels: `[n]` labels in {0, 1}; read-only.
        indices: Positions of the samples in the source dataset.
    """

    images: np.ndarray
    labels: np.ndarray
    indices: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.images.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"Batch has {self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )
        self.images.flags.writeable = False
        self.labels.flags.writeable = False

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    """Sample order for one epoch: a permutation seeded with `seed XOR epoch`."""
    return Rng(int(seed) ^ int(epoch)).permutation(n)


def batch_iter(samples: Dataset, batch_size: int, seed: int, epoch: int) -> Iterator[Batch]:
    """
    Yield the batches of one epoch in shuffled order; the final partial batch is kept.

    Args:
        samples: Dataset to draw from.
        batch_size: Samples per batch.
        seed: Session seed.
        epoch: Epoch number, mixed into the shuffle seed.

    Raises:
        ValueError: `batch_size` is below 1.
    """
    if batch_size < 1:
        raise ShapeError(f"batch_size must be at least 1, got {batch_size}")
    order = epoch_order(len(samples), seed, epoch)
    for start in range(0, len(order), batch_size):
        idx = order[start : start + batch_size]
        yield Batch(
            images=samples.images[idx],
            labels=samples.labels[idx],
            indices=tuple(int(i) for i in idx),
        )
