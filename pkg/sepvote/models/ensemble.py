"""Concrete detectors: the extractor + SModel voting ensemble and single-graph networks."""

import numpy as np

from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError
from sepvote.models.base import Detector
from sepvote.models.profiles import Profile
from sepvote.models.spec import ModelSpec
from sepvote.segmentation.plan import BlockPlan, split_feature
from sepvote.segmentation.scheme import SegmentationScheme
from sepvote.segmentation.vote import VoteResult, hard_vote, votes_from_probs


class EnsembleModel(Detector):
    """
    Feature extractor, fixed block split of its latent map, and one SModel head per block.

    With `shared_heads=True` a single head is applied to every block.
    """

    arch = "proposed"

    def __init__(
        self,
        extractor: ModelSpec,
        scheme: SegmentationScheme,
        plan: BlockPlan,
        heads: list[ModelSpec],
        profile: Profile,
        dtype: str = "f32",
        shared_heads: bool = False,
    ) -> None:
        super().__init__(scheme, profile, dtype, shared_heads)
        expected = 1 if shared_heads else plan.voter_count
        if len(heads) != expected:
            raise ShapeError(f"Expected {expected} heads for {scheme.name}, got {len(heads)}")
        self.extractor = extractor
        self.plan = plan
        self.heads = heads

    @property
    def voter_count(self) -> int:
        return self.plan.voter_count

    def head_for(self, index: int) -> ModelSpec:
        return self.heads[0] if self.shared_heads else self.heads[index]

    def components(self) -> list[tuple[str, ModelSpec]]:
        if self.shared_heads:
            return [("extractor", self.extractor), ("head", self.heads[0])]
        return [("extractor", self.extractor)] + [
            (f"head_{i}", head) for i, head in enumerate(self.heads)
        ]

    def latent(self, x: Tensor, training: bool = False) -> Tensor:
        return self.extractor.forward(x, training)[0]

    def forward(self, x: Tensor, training: bool = False) -> list[Tensor]:
        blocks = split_feature(self.latent(x, training), self.plan)
        return [self.head_for(i).forward(b, training)[0] for i, b in enumerate(blocks)]


class LayeredDetector(Detector):
    """A detector whose voters are the declared outputs of a single layer graph."""

    def __init__(
        self,
        arch: str,
        graph: ModelSpec,
        scheme: SegmentationScheme,
        profile: Profile,
        dtype: str = "f32",
    ) -> None:
        super().__init__(scheme, profile, dtype, shared_heads=False)
        self.arch = arch  # type: ignore[misc]
        self.graph = graph

    @property
    def voter_count(self) -> int:
        return len(self.graph.outputs)

    def components(self) -> list[tuple[str, ModelSpec]]:
        return [("net", self.graph)]

    def forward(self, x: Tensor, training: bool = False) -> list[Tensor]:
        return self.graph.forward(x, training)


def forward_ensemble(model: Detector, image: Tensor | np.ndarray) -> VoteResult:
    """
    Classify one image `[size, size, 3]` by hard voting over the model's heads.

    Raises:
        ValueError: The image does not match the model's input shape.
    """
    data = image.data if isinstance(image, Tensor) else np.asarray(image)
    if data.shape != model.profile.input_shape:
        raise ShapeError(
            f"Expected an image of shape {model.profile.input_shape}, got {data.shape}"
        )
    probs = model.predict_proba(data[None, ...])[0]
    return hard_vote(votes_from_probs(probs))


def vote_batch(model: Detector, images: np.ndarray, batch_size: int = 32) -> list[VoteResult]:
    return model.vote(images, batch_size)
