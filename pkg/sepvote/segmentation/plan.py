"""Block planning and feature splitting for segmentation schemes."""

import math
from dataclasses import dataclass

from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError
from sepvote.nn import functional as F
from sepvote.segmentation.scheme import SchemeKind, SegmentationScheme, central_scheme


@dataclass(frozen=True)
class Block:
    """Axis-aligned voter block; `is_whole` marks the extra whole-feature voter."""

    row_start: int
    row_len: int
    col_start: int
    col_len: int
    is_whole: bool = False

    @property
    def area(self) -> int:
        return self.row_len * self.col_len

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row_len, self.col_len)


@dataclass(frozen=True)
class BlockPlan:
    """Ordered voter blocks for one feature-map size."""

    blocks: tuple[Block, ...]
    height: int
    width: int

    @property
    def voter_count(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def split_sizes(total: int, parts: int) -> list[int]:
    """
    Split `total` into `parts` near-equal sizes; the remainder goes one each to the last strips.

    >>> split_sizes(32, 3)
    [10, 11, 11]
    """
    if parts < 1 or parts > total:
        raise ShapeError(f"Cannot split {total} rows/cols into {parts} strips")
    base, extra = divmod(total, parts)
    return [base] * (parts - extra) + [base + 1] * extra


def _offsets(sizes: list[int]) -> list[tuple[int, int]]:
    out, start = [], 0
    for size in sizes:
        out.append((start, size))
        start += size
    return out


def central_side(dim: int, percent: int) -> int:
    """Side of a centred block holding `percent`% of the area: round(dim * sqrt(p / 100))."""
    return max(1, min(dim, math.floor(dim * math.sqrt(percent / 100.0) + 0.5)))


def plan_blocks(scheme: SegmentationScheme, h: int, w: int) -> BlockPlan:
    """
    Lay out the voter blocks of `scheme` on an `h` x `w` feature map.

    Strip and grid kinds tile the map with near-equal pieces (see `split_sizes`); the "plus
    whole" kinds append one block covering the full map. Central schemes yield a single centred
    block whose side along each dim D is round(D * sqrt(p / 100)).

    Raises:
        ValueError: The map is too small for the requested strip count.
    """
    if h < 1 or w < 1:
        raise ShapeError(f"Feature map must be at least 1x1, got {h}x{w}")
    kind = scheme.kind
    whole = Block(0, h, 0, w, is_whole=True)
    blocks: list[Block]

    if kind is SchemeKind.ORI:
        blocks = [Block(0, h, 0, w)]
    elif kind in (SchemeKind.STRIPS_H, SchemeKind.STRIPS_PLUS_WHOLE_H):
        blocks = [Block(r, n, 0, w) for r, n in _offsets(split_sizes(h, scheme.count))]
    elif kind in (SchemeKind.STRIPS_V, SchemeKind.STRIPS_PLUS_WHOLE_V):
        blocks = [Block(0, h, c, n) for c, n in _offsets(split_sizes(w, scheme.count))]
    elif kind is SchemeKind.QUADRANTS_PLUS_WHOLE:
        blocks = _grid(h, w, 2)
    elif kind is SchemeKind.GRID_PLUS_WHOLE:
        blocks = _grid(h, w, scheme.count)
    else:
        percent = scheme.percent if scheme.percent is not None else 100
        central_scheme(percent)
        rows, cols = central_side(h, percent), central_side(w, percent)
        blocks = [Block((h - rows) // 2, rows, (w - cols) // 2, cols)]

    if kind in (
        SchemeKind.STRIPS_PLUS_WHOLE_H,
        SchemeKind.STRIPS_PLUS_WHOLE_V,
        SchemeKind.QUADRANTS_PLUS_WHOLE,
        SchemeKind.GRID_PLUS_WHOLE,
    ):
        blocks.append(whole)
    return BlockPlan(tuple(blocks), h, w)


def _grid(h: int, w: int, n: int) -> list[Block]:
    rows = _offsets(split_sizes(h, n))
    cols = _offsets(split_sizes(w, n))
    return [Block(r, rn, c, cn) for r, rn in rows for c, cn in cols]


def split_feature(x: Tensor, plan: BlockPlan) -> list[Tensor]:
    """
    Cut `x` (`[h, w, c]` or `[n, h, w, c]`) into one tensor per block of `plan`.

    Blocks covering the full map return `x` itself.

    Raises:
        ValueError: The plan was made for a different feature-map size.
    """
    h, w = x.shape[-3], x.shape[-2]
    if (h, w) != (plan.height, plan.width):
        raise ShapeError(f"Plan for {plan.height}x{plan.width} does not fit a {h}x{w} feature map")
    parts = []
    for block in plan:
        if block.shape == (h, w):
            parts.append(x)
        else:
            parts.append(F.crop(x, block.row_start, block.row_len, block.col_start, block.col_len))
    return parts


def central_crop(x: Tensor, percent: int) -> Tensor:
    """
    Centred crop keeping `percent`% of the feature area; 100 is the identity.

    Raises:
        UsageError: `percent` is not in {10, 20, ..., 100}.
    """
    scheme = central_scheme(percent)
    plan = plan_blocks(scheme, x.shape[-3], x.shape[-2])
    return split_feature(x, plan)[0]
