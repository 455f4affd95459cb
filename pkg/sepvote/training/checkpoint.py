"""
SGF1 checkpoint files.

Layout: the magic bytes `SGF1`, a little-endian uint32 header length, a UTF-8 JSON header, then
the raw little-endian tensor payloads in header directory order. The header records the format
version, the tensor directory (`name -> {shape, dtype, byte_offset, byte_len}`), the
architecture, scheme, profile, training config, epoch and generator state.
"""

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from sepvote.autodiff.rng import Rng
from sepvote.errors import (
    CheckpointVersionError,
    MalformedCheckpointError,
    SchemeMismatchError,
    TruncatedCheckpointError,
)
from sepvote.models.base import Detector
from sepvote.models.profiles import get_profile
from sepvote.segmentation.scheme import get_scheme
from sepvote.training.config import TrainConfig
from sepvote.utils.logger import set_logger
from sepvote.utils.registry import architecture_registry

logger = set_logger(__name__)

MAGIC = b"SGF1"
FORMAT_VERSION = 1
_LENGTH = struct.Struct("<I")
_STORAGE = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
_REQUIRED = ("format_version", "tensors", "arch", "scheme", "profile", "dtype", "epoch", "config")


@dataclass
class Checkpoint:
    header: dict[str, Any]
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def arch(self) -> str:
        return self.header["arch"]

    @property
    def scheme(self) -> str:
        return self.header["scheme"]

    @property
    def profile(self) -> str:
        return self.header["profile"]

    @property
    def dtype(self) -> str:
        return self.header["dtype"]

    @property
    def shared_heads(self) -> bool:
        return bool(self.header.get("shared_heads", False))

    @property
    def epoch(self) -> int:
        return int(self.header["epoch"])

    @property
    def config(self) -> TrainConfig:
        return TrainConfig.from_dict(self.header["config"])

    @property
    def rng(self) -> Rng | None:
        state = self.header.get("rng")
        return Rng.from_state(state) if state else None


def save_checkpoint(
    path: str | Path,
    model: Detector,
    cfg: TrainConfig,
    epoch: int,
    rng: Rng | None = None,
) -> Path:
    """
    Write `model`'s parameters and buffers with the session metadata.

    The file is written to a sibling temporary path and moved into place.

    Args:
        path: Destination file.
        model: Detector to store.
        cfg: Training configuration snapshot.
        epoch: Epoch the weights belong to.
        rng: Generator whose state to store; defaults to a fresh generator seeded by `cfg.seed`.

    Returns:
        The written path.
    """
    path = Path(path)
    storage = _STORAGE[model.dtype]
    directory: dict[str, dict[str, Any]] = {}
    chunks: list[bytes] = []
    offset = 0
    for name, values in model.state_dict().items():
        raw = np.ascontiguousarray(values, dtype=storage).tobytes()
        directory[name] = {
            "shape": list(values.shape),
            "dtype": model.dtype,
            "byte_offset": offset,
            "byte_len": len(raw),
        }
        chunks.append(raw)
        offset += len(raw)

    header = {
        "format_version": FORMAT_VERSION,
        "tensors": directory,
        "arch": model.arch,
        "scheme": model.scheme.name,
        "profile": model.profile.name,
        "shared_heads": model.shared_heads,
        "dtype": model.dtype,
        "epoch": epoch,
        "config": cfg.to_dict(),
        "rng": (rng or Rng(cfg.seed)).state,
    }
    header_bytes = json.dumps(header).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(_LENGTH.pack(len(header_bytes)))
        f.write(header_bytes)
        for raw in chunks:
            f.write(raw)
    os.replace(tmp, path)
    logger.debug(f"Saved checkpoint {path} ({len(directory)} tensors, epoch {epoch})")
    return path


def _read_header(blob: bytes, path: Path) -> tuple[dict[str, Any], int]:
    prefix = len(MAGIC) + _LENGTH.size
    if len(blob) < prefix or blob[: len(MAGIC)] != MAGIC:
        raise MalformedCheckpointError(f"{path} does not start with {MAGIC!r}")
    (length,) = _LENGTH.unpack_from(blob, len(MAGIC))
    if prefix + length > len(blob):
        raise MalformedCheckpointError(f"header of {length} bytes runs past the end of {path}")
    try:
        header = json.loads(blob[prefix : prefix + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise MalformedCheckpointError(f"unreadable header in {path}: {err}") from err
    if not isinstance(header, dict):
        raise MalformedCheckpointError(f"header of {path} is not an object")
    return header, prefix + length


def load_checkpoint(path: str | Path, expected_scheme: str | None = None) -> Checkpoint:
    """
    Read a checkpoint.

    Args:
        path: Checkpoint file.
        expected_scheme: If given, the scheme the checkpoint must have been trained with.

    Raises:
        MalformedCheckpointError: Bad magic, header or tensor directory.
        CheckpointVersionError: Unsupported format version.
        TruncatedCheckpointError: The payload is shorter than the directory declares.
        SchemeMismatchError: The stored scheme differs from `expected_scheme`.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as err:
        raise MalformedCheckpointError(f"cannot read {path}: {err}") from err

    header, start = _read_header(blob, path)
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {header.get('format_version')!r} in {path}; "
            f"expected {FORMAT_VERSION}"
        )
    missing = [k for k in _REQUIRED if k not in header]
    if missing:
        raise MalformedCheckpointError(f"header of {path} lacks {missing}")
    if not isinstance(header["tensors"], dict):
        raise MalformedCheckpointError(f"tensor directory of {path} is not an object")
    if expected_scheme is not None and header["scheme"] != expected_scheme:
        raise SchemeMismatchError(expected_scheme, header["scheme"])

    payload = memoryview(blob)[start:]
    tensors: dict[str, np.ndarray] = {}
    for name, entry in header["tensors"].items():
        try:
            storage = _STORAGE[entry["dtype"]]
            shape = tuple(int(s) for s in entry["shape"])
            begin, size = int(entry["byte_offset"]), int(entry["byte_len"])
        except (KeyError, TypeError, ValueError) as err:
            raise MalformedCheckpointError(f"bad directory entry for '{name}': {err}") from err
        if size != int(np.prod(shape, dtype=np.int64)) * storage.itemsize:
            raise MalformedCheckpointError(f"byte length of '{name}' does not match its shape")
        if begin + size > len(payload):
            raise TruncatedCheckpointError(
                f"truncated checkpoint: '{name}' needs bytes {begin}..{begin + size} "
                f"but the payload holds {len(payload)}"
            )
        values = np.frombuffer(payload[begin : begin + size], dtype=storage).reshape(shape)
        tensors[name] = values.astype(storage.newbyteorder("="))
    return Checkpoint(header=header, tensors=tensors)


def restore_model(checkpoint: Checkpoint) -> Detector:
    """
    Rebuild the detector described by a checkpoint and load its weights.

    Raises:
        ShapeMismatchError: The stored tensors do not fit the rebuilt model.
        UsageError: The stored architecture, scheme or profile is unknown.
    """
    model = architecture_registry.build(
        checkpoint.arch,
        get_scheme(checkpoint.scheme),
        get_profile(checkpoint.profile),
        seed=checkpoint.config.seed,
        shared_heads=checkpoint.shared_heads,
        dtype=checkpoint.dtype,
    )
    model.load_state_dict(checkpoint.tensors)
    return model
