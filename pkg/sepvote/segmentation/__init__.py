"""Latent-feature segmentation schemes and hard voting."""

from sepvote.segmentation.plan import (
    Block,
    BlockPlan,
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
    SchemeKind,
    SegmentationScheme,
    central_scheme,
    get_scheme,
)
from sepvote.segmentation.vote import Label, Vote, VoteResult, hard_vote, votes_from_probs

__all__ = [
    "Block",
    "BlockPlan",
    "CENTRAL_SCHEME_NAMES",
    "Label",
    "SCHEME_NAMES",
    "SEGMENT_SCHEME_NAMES",
    "SchemeKind",
    "SegmentationScheme",
    "Vote",
    "VoteResult",
    "central_crop",
    "central_scheme",
    "central_side",
    "get_scheme",
    "hard_vote",
    "plan_blocks",
    "split_feature",
    "split_sizes",
    "votes_from_probs",
]
