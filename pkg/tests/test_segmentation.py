"""Tests for segmentation schemes, block plans and feature splitting."""

import numpy as np
import pytest

from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError, UsageError
from sepvote.segmentation.plan import (
    Block,
    central_crop,
    central_side,
    plan_blocks,
    split_feature,
    split_sizes,
)
from sepvote.segmentation.scheme import (
    CENTRAL_SCHEME_NAMES,
    SCHEME_NAMES,
    SEGMENT_SCHEME_NAMES,
    central_scheme,
    get_scheme,
)

VOTERS = {
    "ori": 1,
    "v3_h": 3,
    "v3_v": 3,
    "v5": 5,
    "v7_h": 7,
    "v7_v": 7,
    "v10": 10,
    "v17": 17,
    "v26": 26,
    "v37": 37,
}


class TestSchemes:
    """Tests for scheme lookup."""

    def test_names(self):
        assert SEGMENT_SCHEME_NAMES == tuple(VOTERS)
        assert CENTRAL_SCHEME_NAMES == tuple(f"cen{p}" for p in range(10, 100, 10))
        assert len(SCHEME_NAMES) == 19

    @pytest.mark.parametrize("name, voters", sorted(VOTERS.items()))
    def test_voter_counts(self, name, voters):
        scheme = get_scheme(name)
        assert scheme.voter_count == voters
        assert plan_blocks(scheme, 32, 32).voter_count == voters

    def test_lookup_is_case_insensitive(self):
        assert get_scheme(" V5 ").name == "v5"
        assert get_scheme("cen30").percent == 30

    @pytest.mark.parametrize("name", ["v4", "cen15", "cen110", "grid"])
    def test_unknown_scheme_lists_valid_names(self, name):
        with pytest.raises(UsageError, match="Valid schemes: ori, v3_h"):
            get_scheme(name)

    def test_central_percent_range(self):
        assert central_scheme(100).name == "cen100"
        with pytest.raises(UsageError):
            central_scheme(0)


class TestPlans:
    """Tests for block layout on a feature map."""

    def test_split_sizes_remainder_goes_last(self):
        assert split_sizes(32, 3) == [10, 11, 11]
        assert split_sizes(32, 6) == [5, 5, 5, 5, 6, 6]
        assert split_sizes(8, 2) == [4, 4]
        with pytest.raises(ShapeError):
            split_sizes(2, 3)

    def test_v5_quadrants_and_whole(self):
        plan = plan_blocks(get_scheme("v5"), 32, 32)
        assert list(plan) == [
            Block(0, 16, 0, 16),
            Block(0, 16, 16, 16),
            Block(16, 16, 0, 16),
            Block(16, 16, 16, 16),
            Block(0, 32, 0, 32, is_whole=True),
        ]

    def test_v3_h_rows(self):
        plan = plan_blocks(get_scheme("v3_h"), 32, 32)
        assert [(b.row_start, b.row_len) for b in plan] == [(0, 10), (10, 11), (21, 11)]
        assert all(b.col_len == 32 and not b.is_whole for b in plan)

    def test_v3_v_columns(self):
        plan = plan_blocks(get_scheme("v3_v"), 32, 32)
        assert [(b.col_start, b.col_len) for b in plan] == [(0, 10), (10, 11), (21, 11)]

    def test_v7_strips_plus_whole(self):
        plan = plan_blocks(get_scheme("v7_v"), 32, 32)
        assert [b.col_len for b in plan][:6] == [5, 5, 5, 5, 6, 6]
        assert plan.blocks[-1].is_whole

    @pytest.mark.parametrize("name, n", [("v10", 3), ("v17", 4), ("v26", 5), ("v37", 6)])
    def test_grid_tiles_the_map(self, name, n):
        """Grid blocks cover every cell exactly once; the whole block is extra."""
        plan = plan_blocks(get_scheme(name), 32, 32)
        cover = np.zeros((32, 32), dtype=int)
        for b in plan.blocks[:-1]:
            cover[b.row_start : b.row_start + b.row_len, b.col_start : b.col_start + b.col_len] += 1
        assert np.all(cover == 1)
        assert len(plan.blocks) == n * n + 1

    @pytest.mark.parametrize(
        "percent, side", [(10, 10), (30, 18), (50, 23), (90, 30), (100, 32)]
    )
    def test_central_side(self, percent, side):
        assert central_side(32, percent) == side
        block = plan_blocks(central_scheme(percent), 32, 32).blocks[0]
        assert block.shape == (side, side)
        assert block.row_start == (32 - side) // 2

    def test_empty_map(self):
        with pytest.raises(ShapeError):
            plan_blocks(get_scheme("v5"), 0, 4)


class TestSplitFeature:
    """Tests for cutting feature maps into blocks."""

    def test_v5_latent_blocks(self, rng):
        """A 32x32x128 latent map splits into four 16x16x128 blocks and the whole map."""
        x = Tensor(rng.normal((2, 32, 32, 128)))
        parts = split_feature(x, plan_blocks(get_scheme("v5"), 32, 32))
        assert [p.shape for p in parts] == [(2, 16, 16, 128)] * 4 + [(2, 32, 32, 128)]
        assert parts[-1] is x
        np.testing.assert_array_equal(parts[3].data, x.data[:, 16:, 16:, :])

    def test_grid_reassembles_exactly(self, rng):
        x = Tensor(rng.normal((32, 32, 3)))
        plan = plan_blocks(get_scheme("v10"), 32, 32)
        out = np.zeros_like(x.data)
        for block, part in zip(plan.blocks[:-1], split_feature(x, plan)[:-1], strict=True):
            rows = slice(block.row_start, block.row_start + block.row_len)
            cols = slice(block.col_start, block.col_start + block.col_len)
            out[rows, cols] = part.data
        np.testing.assert_array_equal(out, x.data)

    def test_plan_size_must_match(self, rng):
        x = Tensor(rng.normal((16, 16, 3)))
        with pytest.raises(ShapeError):
            split_feature(x, plan_blocks(get_scheme("v5"), 32, 32))

    def test_central_crop(self, rng):
        x = Tensor(rng.normal((1, 32, 32, 2)))
        crop = central_crop(x, 50)
        assert crop.shape == (1, 23, 23, 2)
        np.testing.assert_array_equal(crop.data, x.data[:, 4:27, 4:27, :])
        assert central_crop(x, 100) is x
        with pytest.raises(UsageError):
            central_crop(x, 55)
