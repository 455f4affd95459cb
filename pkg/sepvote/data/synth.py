"""
Synthetic splice-tamper images.

Real images are smooth sinusoidal colour fields with pixel noise. A fake is a real image with a
rectangle pasted from a different real image: the pasted patch is box-blurred and its border is
feather-blended, which leaves boundary artefacts a detector can learn.
"""

import json
import math
from collections.abc import Iterator
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from sepvote.autodiff.rng import Rng
from sepvote.data.dataset import Dataset
from sepvote.data.image import encode_image, quantize
from sepvote.data.manifest import ManifestEntry, write_manifest
from sepvote.errors import ShapeError, UsageError
from sepvote.utils.logger import set_logger

logger = set_logger(__name__)

MANIFEST_NAME = "manifest.jsonl"
CONFIG_NAME = "synth_config.json"
IMAGE_DIR = "images"
SINUSOIDS = 4
FREQ_RANGE = (0.5, 2.0)  # cycles per image side
FIELD_SPAN = 0.35


@dataclass(frozen=True, kw_only=True)
class SynthConfig:
    """
    Settings for the synthetic generator.

    Attributes:
        count: Images per class.
        size: Image side in pixels.
        seed: Generator seed.
        patch_min: Smallest patch side as a fraction of `size`.
        patch_max: Largest patch side as a fraction of `size`.
        feather: Width in pixels of the blended patch border.
        blur: Box-blur radius applied inside the patch.
        noise: Standard deviation of the Gaussian pixel noise.
        val_fraction: Share of each class assigned to "val".
        test_fraction: Share of each class assigned to "test".
        image_format: File suffix, "png" or "ppm".
    """

    count: int = 10
    size: int = 64
    seed: int = 0
    patch_min: float = 0.2
    patch_max: float = 0.4
    feather: int = 2
    blur: int = 1
    noise: float = 0.02
    val_fraction: float = 0.2
    test_fraction: float = 0.0
    image_format: str = "png"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise UsageError(f"count must be at least 1, got {self.count}")
        if self.size < 8:
            raise UsageError(f"size must be at least 8, got {self.size}")
        if not 0.0 < self.patch_min <= self.patch_max < 1.0:
            raise UsageError(
                f"patch fractions must satisfy 0 < min <= max < 1, got "
                f"{self.patch_min}..{self.patch_max}"
            )
        if self.feather < 0 or self.blur < 0:
            raise UsageError("feather and blur must be non-negative")
        if self.noise < 0:
            raise UsageError(f"noise must be non-negative, got {self.noise}")
        if self.val_fraction < 0 or self.test_fraction < 0:
            raise UsageError("split fractions must be non-negative")
        if self.val_fraction + self.test_fraction >= 1.0:
            raise UsageError("val_fraction + test_fraction must leave room for training images")
        if self.image_format not in ("png", "ppm"):
            raise UsageError(f"image_format must be 'png' or 'ppm', got {self.image_format!r}")

    def split_counts(self) -> dict[str, int]:
        """Images per class in each split."""
        val = int(round(self.count * self.val_fraction))
        test = int(round(self.count * self.test_fraction))
        return {"train": self.count - val - test, "val": val, "test": test}

    def split_of(self, index: int) -> str:
        counts = self.split_counts()
        if index < counts["train"]:
            return "train"
        if index < counts["train"] + counts["val"]:
            return "val"
        return "test"


@dataclass(frozen=True)
class Rect:
    top: int
    left: int
    height: int
    width: int

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.top, self.top + self.height), slice(self.left, self.left + self.width)


@dataclass(frozen=True)
class SynthSample:
    image: np.ndarray
    label: int
    sample_id: str
    split: str
    patch: Rect | None = None


@dataclass(frozen=True)
class SynthResult:
    manifest_path: Path
    config_path: Path
    entries: list[ManifestEntry]


def sinusoid_field(size: int, rng: Rng) -> np.ndarray:
    """Sum of low-frequency sinusoids per channel, scaled into [0.5 - span, 0.5 + span]."""
    coords = np.arange(size, dtype=np.float64) / size
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    channels = []
    for _ in range(3):
        freqs = rng.uniform(FREQ_RANGE[0], FREQ_RANGE[1], size=(SINUSOIDS, 2))
        signs = np.where(rng.uniform(size=(SINUSOIDS, 2)) < 0.5, -1.0, 1.0)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=SINUSOIDS)
        amps = rng.uniform(0.5, 1.0, size=SINUSOIDS)
        field = np.zeros((size, size))
        for (fy, fx), (sy, sx), phase, amp in zip(freqs, signs, phases, amps, strict=True):
            field += amp * np.sin(2.0 * math.pi * (sy * fy * yy + sx * fx * xx) + phase)
        channels.append(0.5 + FIELD_SPAN * field / amps.sum())
    return np.stack(channels, axis=2)


def real_image(cfg: SynthConfig, rng: Rng) -> np.ndarray:
    field = sinusoid_field(cfg.size, rng)
    noise = rng.normal(field.shape, std=cfg.noise, dtype=np.float64)
    return np.clip(field + noise, 0.0, 1.0)


def box_blur(patch: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a (2r+1) x (2r+1) window with edge replication."""
    if radius == 0:
        return patch.copy()
    h, w = patch.shape[:2]
    padded = np.pad(patch, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
    total = np.zeros_like(patch)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            total += padded[dy : dy + h, dx : dx + w]
    return total / (2 * radius + 1) ** 2


def feather_mask(height: int, width: int, feather: int) -> np.ndarray:
    """Blend weight per patch pixel, rising from the border to 1 over `feather` pixels."""
    rows = np.arange(height)
    cols = np.arange(width)
    d = np.minimum.outer(np.minimum(rows, height - 1 - rows), np.minimum(cols, width - 1 - cols))
    return np.minimum(1.0, (d + 1) / (feather + 1))[:, :, None]


def random_rect(cfg: SynthConfig, rng: Rng) -> Rect:
    lo = max(1, int(round(cfg.patch_min * cfg.size)))
    hi = max(lo, int(round(cfg.patch_max * cfg.size)))
    height = int(rng.integers(lo, hi + 1))
    width = int(rng.integers(lo, hi + 1))
    top = int(rng.integers(0, cfg.size - height + 1))
    left = int(rng.integers(0, cfg.size - width + 1))
    return Rect(top, left, height, width)


def fake_image(cfg: SynthConfig, rng: Rng) -> tuple[np.ndarray, Rect]:
    """
    Paste a blurred, feathered rectangle from one real image into another.

    Returns:
        The spliced image and the rectangle that was replaced.
    """
    base = real_image(cfg, rng.spawn(0))
    donor = real_image(cfg, rng.spawn(1))
    target = random_rect(cfg, rng)
    source = Rect(
        int(rng.integers(0, cfg.size - target.height + 1)),
        int(rng.integers(0, cfg.size - target.width + 1)),
        target.height,
        target.width,
    )
    patch = box_blur(donor[source.slices], cfg.blur)
    alpha = feather_mask(target.height, target.width, cfg.feather)
    out = base.copy()
    out[target.slices] = alpha * patch + (1.0 - alpha) * base[target.slices]
    return np.clip(out, 0.0, 1.0), target


def synth_samples(cfg: SynthConfig) -> Iterator[SynthSample]:
    """
    Yield samples in the order real 0, fake 0, real 1, fake 1, ...

    Pixel values are quantized to 8 bits so in-memory samples equal their decoded files.
    """
    root = Rng(cfg.seed)
    for i in range(cfg.count):
        split = cfg.split_of(i)
        real = real_image(cfg, root.spawn(2 * i))
        yield SynthSample(quantize(real) / np.float32(255), 1, f"real_{i:05d}", split)
        fake, rect = fake_image(cfg, root.spawn(2 * i + 1))
        yield SynthSample(quantize(fake) / np.float32(255), 0, f"fake_{i:05d}", split, rect)


def synth_dataset(cfg: SynthConfig, split: str | None = None) -> Dataset:
    """Build a split (or the whole set) in memory without touching the disk."""
    chosen = [s for s in synth_samples(cfg) if split is None or s.split == split]
    if not chosen:
        raise ShapeError(f"Synthetic split '{split}' is empty")
    return Dataset(
        images=np.stack([s.image for s in chosen]),
        labels=np.array([s.label for s in chosen], dtype=np.int64),
        sources=[s.sample_id for s in chosen],
        name=split or "synth",
    )


def generate_synthetic_dataset(cfg: SynthConfig, out_dir: str | Path) -> SynthResult:
    """
    Write images, `manifest.jsonl` and a `synth_config.json` echo under `out_dir`.

    Raises:
        OSError: The directory or a file cannot be written.
    """
    out_dir = Path(out_dir)
    image_dir = out_dir / IMAGE_DIR
    image_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for sample in synth_samples(cfg):
        path = image_dir / f"{sample.sample_id}.{cfg.image_format}"
        encode_image(sample.image, path)
        entries.append(ManifestEntry(path=path.resolve(), label=sample.label, split=sample.split))

    manifest_path = write_manifest(entries, out_dir / MANIFEST_NAME)
    config_path = out_dir / CONFIG_NAME
    config_path.write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote {len(entries)} synthetic images to {image_dir} ({cfg.split_counts()} per class)")
    return SynthResult(manifest_path, config_path, entries)


def boundary_contrast(image: np.ndarray, rect: Rect, band: int) -> float:
    """
    Ratio of the mean absolute gradient in a band around the rectangle's border to the mean
    inside the rectangle beyond that band.

    Raises:
        ValueError: The rectangle has no interior beyond the band.
    """
    img = np.asarray(image, dtype=np.float64)
    grad = (
        np.abs(np.diff(img, axis=0))[:, :-1].mean(axis=2)
        + np.abs(np.diff(img, axis=1))[:-1, :].mean(axis=2)
    )
    rows = np.arange(grad.shape[0])[:, None]
    cols = np.arange(grad.shape[1])[None, :]
    # Signed Chebyshev depth: >= 0 inside the rectangle, negative outside.
    depth = np.minimum(
        np.minimum(rows - rect.top, rect.top + rect.height - 1 - rows),
        np.minimum(cols - rect.left, rect.left + rect.width - 1 - cols),
    )
    border = (depth >= -band) & (depth < band)
    interior = depth >= band
    if not interior.any():
        raise ShapeError(f"Rectangle {rect} has no interior beyond a {band}-pixel band")
    return float(grad[border].mean() / grad[interior].mean())
