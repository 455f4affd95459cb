"""Manifests, image codecs, in-memory datasets, batching and the synthetic splice generator."""

from sepvote.data.batching import Batch, batch_iter, epoch_order
from sepvote.data.dataset import Dataset, load_image, load_split
from sepvote.data.image import decode_image, encode_image, quantize, resize_bilinear
from sepvote.data.manifest import (
    ManifestEntry,
    load_manifest,
    split_entries,
    split_names,
    write_manifest,
)
from sepvote.data.synth import (
    Rect,
    SynthConfig,
    SynthResult,
    SynthSample,
    boundary_contrast,
    generate_synthetic_dataset,
    synth_dataset,
    synth_samples,
)

__all__ = [
    "Batch",
    "Dataset",
    "ManifestEntry",
    "Rect",
    "SynthConfig",
    "SynthResult",
    "SynthSample",
    "batch_iter",
    "boundary_contrast",
    "decode_image",
    "encode_image",
    "epoch_order",
    "generate_synthetic_dataset",
    "load_image",
    "load_manifest",
    "load_split",
    "quantize",
    "resize_bilinear",
    "split_entries",
    "split_names",
    "synth_dataset",
    "synth_samples",
    "write_manifest",
]
