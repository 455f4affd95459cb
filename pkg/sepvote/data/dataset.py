"""In-memory labelled image sets."""

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sepvote.data.image import decode_image, resize_bilinear
from sepvote.data.manifest import ManifestEntry
from sepvote.errors import DataError, ShapeError
from sepvote.utils.logger import set_logger

logger = set_logger(__name__)


@dataclass
class Dataset:
    """
    A split held in memory.

    Attributes:
        images: `[n, s, s, 3]` float32 values in [0, 1].
        labels: `[n]` int64 labels, 1 for real and 0 for fake.
        sources: Image path or synthetic id per sample.
        name: Split name.
    """

    images: np.ndarray
    labels: np.ndarray
    sources: list[str] = field(default_factory=list)
    name: str = "data"

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.labels.shape[0]
        if self.images.ndim != 4 or self.images.shape[3] != 3:
            raise ShapeError(f"Dataset images must be [n, h, w, 3], got {self.images.shape}")
        if self.images.shape[0] != n:
            raise ShapeError(f"{self.images.shape[0]} images but {n} labels")
        if n and not np.all(np.isin(self.labels, (0, 1))):
            raise ShapeError("Dataset labels must be 0 or 1")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise ShapeError("Dataset pixel values must lie in [0, 1]")
        if not self.sources:
            self.sources = [f"{self.name}:{i}" for i in range(n)]

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def image_size(self) -> int:
        return int(self.images.shape[1])

    def class_counts(self) -> dict[int, int]:
        return {label: int(np.sum(self.labels == label)) for label in (0, 1)}

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            images=self.images[idx],
            labels=self.labels[idx],
            sources=[self.sources[i] for i in idx],
            name=self.name,
        )


def load_image(path: str | Path, size: int) -> np.ndarray:
    """
    Decode one image and bring it to `[size, size, 3]`.

    Square sources of another side are resized; non-square sources are rejected.
    """
    image = decode_image(path)
    h, w = image.shape[:2]
    if h != w:
        raise DataError(f"Image {path} is {h}x{w}; pre-cropped square faces are required")
    if h != size:
        image = resize_bilinear(image, size)
    return image


def load_split(
    entries: Sequence[ManifestEntry],
    split: str,
    size: int,
    max_workers: int = 4,
) -> Dataset:
    """
    Load every entry of `split`, decoding images on a thread pool.

    Sample order follows the manifest regardless of decode parallelism.

    Raises:
        DataError: The split has no entries or an image cannot be used.
    """
    chosen = [e for e in entries if e.split == split]
    if not chosen:
        raise DataError(f"Split '{split}' is empty")

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        images = list(pool.map(lambda e: load_image(e.path, size), chosen))

    dataset = Dataset(
        images=np.stack(images),
        labels=np.array([e.label for e in chosen], dtype=np.int64),
        sources=[str(e.path) for e in chosen],
        name=split,
    )
    counts = dataset.class_counts()
    logger.info(f"Loaded split '{split}': {len(dataset)} images ({counts[1]} real, {counts[0]} fake)")
    return dataset
