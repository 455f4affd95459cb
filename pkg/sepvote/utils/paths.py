"""
Path helpers for command arguments and manifest entries.

`~` and environment variables are expanded everywhere a user-supplied path is accepted.
"""

import os
from pathlib import Path

from sepvote.errors import DataError


def _expand(value: str | Path) -> Path:
    return Path(os.path.expandvars(os.path.expanduser(str(value).strip())))


def resolve_path(value: str | Path) -> Path:
    """Absolute form of a command-line path."""
    return _expand(value).resolve()


def ensure_directory(path: str | Path) -> Path:
    """
    Create `path` and its parents if missing and return it resolved.

    Raises:
        DataError: A regular file already occupies `path`.
    """
    path = resolve_path(path)
    if path.exists() and not path.is_dir():
        raise DataError(f"Not a directory: {path}")
    path.mkdir(parents=True, exist_ok=True)
    return path


def resolve_relative(value: str, anchor: Path) -> Path:
    """
    Resolve a manifest path against the manifest's directory unless it is already absolute.

    Args:
        value: Path string as written in a manifest or config file.
        anchor: Directory relative paths are interpreted against.
    """
    candidate = _expand(value)
    if not candidate.is_absolute():
        candidate = anchor / candidate
    return candidate.resolve()
