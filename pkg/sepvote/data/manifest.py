"""
JSON Lines manifests listing labelled images.

Each non-blank line is an object `{"path": str, "label": 0 | 1, "split": str}`. Relative paths
are resolved against the manifest's directory.
"""

import json
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from sepvote.errors import (
    DuplicateEntryError,
    ManifestError,
    ManifestLabelError,
    ManifestNotFoundError,
)
from sepvote.utils.logger import set_logger
from sepvote.utils.paths import resolve_relative

logger = set_logger(__name__)

STANDARD_SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    label: int
    split: str

    def to_record(self, anchor: Path | None = None) -> dict[str, object]:
        path = self.path
        if anchor is not None:
            try:
                path = path.relative_to(anchor)
            except ValueError:
                pass
        return {"path": path.as_posix(), "label": self.label, "split": self.split}


def _parse_line(raw: str, lineno: int, anchor: Path, check_exists: bool) -> ManifestEntry:
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ManifestError(f"invalid JSON ({err.msg})", lineno) from err
    if not isinstance(record, dict):
        raise ManifestError("expected a JSON object", lineno)

    missing = [k for k in ("path", "label", "split") if k not in record]
    if missing:
        raise ManifestError(f"missing keys {missing}", lineno)

    label = record["label"]
    # bool is an int subclass; reject it explicitly.
    if isinstance(label, bool) or label not in (0, 1):
        raise ManifestLabelError(f"label must be 0 or 1, got {label!r}", lineno)

    split = record["split"]
    if not isinstance(split, str) or not split:
        raise ManifestError(f"split must be a non-empty string, got {split!r}", lineno)

    if not isinstance(record["path"], str) or not record["path"]:
        raise ManifestError("path must be a non-empty string", lineno)
    path = resolve_relative(record["path"], anchor)
    if check_exists and not path.is_file():
        raise ManifestError(f"image not found: {path}", lineno)
    return ManifestEntry(path=path, label=int(label), split=split)


def load_manifest(path: str | Path, check_exists: bool = True) -> list[ManifestEntry]:
    """
    Parse a manifest file.

    Args:
        path: Manifest location.
        check_exists: Require every listed image to exist.

    Returns:
        Entries in file order. An empty manifest yields an empty list and a warning.

    Raises:
        ManifestNotFoundError: The manifest does not exist.
        ManifestLabelError: A label is outside {0, 1}.
        DuplicateEntryError: An image path is listed twice.
        ManifestError: Any other malformed line.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestNotFoundError(f"manifest not found: {path}")

    anchor = path.resolve().parent
    entries: list[ManifestEntry] = []
    seen: dict[Path, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            entry = _parse_line(raw, lineno, anchor, check_exists)
            if entry.path in seen:
                raise DuplicateEntryError(
                    f"duplicate path {entry.path} (first listed on line {seen[entry.path]})",
                    lineno,
                )
            seen[entry.path] = lineno
            entries.append(entry)

    if not entries:
        logger.warning(f"Manifest {path} lists no images")
    return entries


def write_manifest(entries: Iterable[ManifestEntry], path: str | Path) -> Path:
    """Write entries one JSON object per line, with paths relative to the manifest directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    anchor = path.resolve().parent
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(json.dumps(entry.to_record(anchor)) + "\n")
    return path


def split_entries(entries: Iterable[ManifestEntry], split: str) -> list[ManifestEntry]:
    return [e for e in entries if e.split == split]


def split_names(entries: Iterable[ManifestEntry]) -> list[str]:
    """Distinct split names; the standard ones first, then others in first-seen order."""
    names = list(dict.fromkeys(e.split for e in entries))
    standard = [s for s in STANDARD_SPLITS if s in names]
    return standard + [s for s in names if s not in STANDARD_SPLITS]
