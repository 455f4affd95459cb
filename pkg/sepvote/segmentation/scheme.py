"""Declarative segmentation schemes and their canonical names."""

import re
from dataclasses import dataclass
from enum import Enum

from sepvote.errors import UsageError

CENTRAL_PERCENTS = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


class SchemeKind(str, Enum):
    ORI = "ori"
    STRIPS_H = "strips_h"
    STRIPS_V = "strips_v"
    QUADRANTS_PLUS_WHOLE = "quadrants_plus_whole"
    STRIPS_PLUS_WHOLE_H = "strips_plus_whole_h"
    STRIPS_PLUS_WHOLE_V = "strips_plus_whole_v"
    GRID_PLUS_WHOLE = "grid_plus_whole"
    CENTRAL = "central"


@dataclass(frozen=True)
class SegmentationScheme:
    """
    How a latent feature map is sliced into voter blocks.

    Attributes:
        name: Canonical name, e.g. "v5" or "cen30".
        kind: Slicing family.
        count: Strip count for strip kinds, grid side for `GRID_PLUS_WHOLE`, otherwise 1.
        percent: Area percentage for `CENTRAL`, otherwise None.
    """

    name: str
    kind: SchemeKind
    count: int = 1
    percent: int | None = None

    @property
    def voter_count(self) -> int:
        kind = self.kind
        if kind in (SchemeKind.ORI, SchemeKind.CENTRAL):
            return 1
        if kind in (SchemeKind.STRIPS_H, SchemeKind.STRIPS_V):
            return self.count
        if kind is SchemeKind.QUADRANTS_PLUS_WHOLE:
            return 5
        if kind in (SchemeKind.STRIPS_PLUS_WHOLE_H, SchemeKind.STRIPS_PLUS_WHOLE_V):
            return self.count + 1
        return self.count * self.count + 1

    @property
    def is_central(self) -> bool:
        return self.kind is SchemeKind.CENTRAL

    def __str__(self) -> str:
        return self.name


_FIXED: dict[str, SegmentationScheme] = {
    "ori": SegmentationScheme("ori", SchemeKind.ORI),
    "v3_h": SegmentationScheme("v3_h", SchemeKind.STRIPS_H, 3),
    "v3_v": SegmentationScheme("v3_v", SchemeKind.STRIPS_V, 3),
    "v5": SegmentationScheme("v5", SchemeKind.QUADRANTS_PLUS_WHOLE),
    "v7_h": SegmentationScheme("v7_h", SchemeKind.STRIPS_PLUS_WHOLE_H, 6),
    "v7_v": SegmentationScheme("v7_v", SchemeKind.STRIPS_PLUS_WHOLE_V, 6),
    "v10": SegmentationScheme("v10", SchemeKind.GRID_PLUS_WHOLE, 3),
    "v17": SegmentationScheme("v17", SchemeKind.GRID_PLUS_WHOLE, 4),
    "v26": SegmentationScheme("v26", SchemeKind.GRID_PLUS_WHOLE, 5),
    "v37": SegmentationScheme("v37", SchemeKind.GRID_PLUS_WHOLE, 6),
}

SEGMENT_SCHEME_NAMES: tuple[str, ...] = tuple(_FIXED)
CENTRAL_SCHEME_NAMES: tuple[str, ...] = tuple(f"cen{p}" for p in CENTRAL_PERCENTS[:-1])
SCHEME_NAMES: tuple[str, ...] = SEGMENT_SCHEME_NAMES + CENTRAL_SCHEME_NAMES

_CENTRAL_RE = re.compile(r"^cen(?P<percent>\d+)$")


def central_scheme(percent: int) -> SegmentationScheme:
    """
    Build the central-crop scheme keeping `percent`% of the feature area.

    Raises:
        UsageError: `percent` is not a multiple of ten in [10, 100].
    """
    if percent not in CENTRAL_PERCENTS:
        raise UsageError(f"Central percentage must be one of {list(CENTRAL_PERCENTS)}, got {percent}")
    return SegmentationScheme(f"cen{percent}", SchemeKind.CENTRAL, 1, percent)


def get_scheme(name: str) -> SegmentationScheme:
    """
    Resolve a canonical scheme name.

    Raises:
        UsageError: The name is not a known scheme; the message lists the valid names.
    """
    key = name.strip().lower()
    if key in _FIXED:
        return _FIXED[key]
    match = _CENTRAL_RE.match(key)
    if match and int(match["percent"]) in CENTRAL_PERCENTS:
        return central_scheme(int(match["percent"]))
    raise UsageError(f"Unknown scheme: '{name}'. Valid schemes: {', '.join(SCHEME_NAMES)}")
