"""Shared fixtures."""

import numpy as np
import pytest

from sepvote.autodiff.rng import Rng
from sepvote.data.dataset import Dataset


@pytest.fixture
def rng():
    return Rng(1234)


@pytest.fixture
def tiny_dataset():
    """Eight 64x64 images, four per class, with a brightness cue separating the classes."""
    gen = Rng(7)
    images = gen.uniform(0.0, 0.5, size=(8, 64, 64, 3)).astype(np.float32)
    labels = np.array([1, 0, 1, 0, 1, 0, 1, 0], dtype=np.int64)
    images[labels == 1] += 0.5
    return Dataset(images=images, labels=labels, name="tiny")
