"""Network assembly: profiles, layer graphs, detectors and parameter summaries."""

from sepvote.models.base import Detector
from sepvote.models.ensemble import EnsembleModel, LayeredDetector, forward_ensemble, vote_batch
from sepvote.models.profiles import PROFILES, Profile, get_profile
from sepvote.models.spec import INPUT, LayerRow, ModelSpec
from sepvote.models.summary import ModelSummary, SummaryRow, model_summary
from sepvote.models.zoo import (
    build_ensemble,
    build_feature_extractor,
    build_mesonet,
    build_mesonet_detector,
    build_segmented_mesonet,
    build_segmented_mesonet_detector,
    build_smodel,
)

__all__ = [
    "Detector",
    "EnsembleModel",
    "INPUT",
    "LayerRow",
    "LayeredDetector",
    "ModelSpec",
    "ModelSummary",
    "PROFILES",
    "Profile",
    "SummaryRow",
    "build_ensemble",
    "build_feature_extractor",
    "build_mesonet",
    "build_mesonet_detector",
    "build_segmented_mesonet",
    "build_segmented_mesonet_detector",
    "build_smodel",
    "forward_ensemble",
    "get_profile",
    "model_summary",
    "vote_batch",
]
