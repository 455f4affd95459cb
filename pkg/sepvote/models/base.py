"""Base interface shared by every detector architecture."""

from abc import ABC, abstractmethod
from collections.abc import Iterator
from typing import Any, ClassVar

import numpy as np

from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError, ShapeMismatchError
from sepvote.models.profiles import Profile
from sepvote.models.spec import ModelSpec
from sepvote.nn import functional as F
from sepvote.segmentation.scheme import SegmentationScheme
from sepvote.segmentation.vote import VoteResult, hard_vote, votes_from_probs
from sepvote.utils.logger import set_logger

REAL_COLUMN = 1


class Detector(ABC):
    """
    Image-level real/fake classifier made of one or more voting heads.

    `forward` returns one `[n, 2]` softmax tensor per voter, columns ordered (fake, real). The
    image label is the hard vote over the per-voter argmax labels.

    Attributes:
        arch: Architecture name as exposed on the command line.
        scheme: Segmentation scheme the voters are laid out by.
        profile: Size profile the model was built for.
        shared_heads: Whether all voters share one head's parameters.
    """

    arch: ClassVar[str] = ""

    def __init__(
        self,
        scheme: SegmentationScheme,
        profile: Profile,
        dtype: str = "f32",
        shared_heads: bool = False,
    ) -> None:
        self.logger = set_logger(self.__class__.__name__)
        self.scheme = scheme
        self.profile = profile
        self.dtype = dtype
        self.shared_heads = shared_heads

    @property
    @abstractmethod
    def voter_count(self) -> int:
        """Number of voting heads evaluated per image."""

    @abstractmethod
    def components(self) -> list[tuple[str, ModelSpec]]:
        """Named sub-graphs owning this model's parameters, each listed once."""

    @abstractmethod
    def forward(self, x: Tensor, training: bool = False) -> list[Tensor]:
        """
        Run a batch `[n, size, size, 3]` through the model.

        Returns:
            One `[n, 2]` probability tensor per voter, in block order.
        """

    def _prefixed(self, attr: str) -> Iterator[tuple[str, Tensor]]:
        for prefix, spec in self.components():
            for key, tensor in getattr(spec, attr)().items():
                yield f"{prefix}.{key}", tensor

    def named_parameters(self) -> dict[str, Tensor]:
        return dict(self._prefixed("named_parameters"))

    def named_buffers(self) -> dict[str, Tensor]:
        return dict(self._prefixed("named_buffers"))

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copies of every parameter followed by every buffer, in a stable order."""
        state = {name: t.data.copy() for name, t in self.named_parameters().items()}
        state.update({name: t.data.copy() for name, t in self.named_buffers().items()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """
        Overwrite parameters and buffers in place.

        Raises:
            ShapeMismatchError: A tensor is missing, unexpected, or has the wrong shape.
        """
        targets = {**self.named_parameters(), **self.named_buffers()}
        missing = sorted(set(targets) - set(state))
        unexpected = sorted(set(state) - set(targets))
        if missing or unexpected:
            raise ShapeMismatchError(
                f"shape mismatch: missing tensors {missing[:5]}, unexpected tensors {unexpected[:5]}"
            )
        for name, tensor in targets.items():
            values = np.asarray(state[name])
            if values.shape != tensor.shape:
                raise ShapeMismatchError(
                    f"shape mismatch for '{name}': model {tensor.shape}, stored {values.shape}"
                )
            tensor.data[...] = values.astype(tensor.dtype, copy=False)

    def parameter_count(self) -> int:
        return sum(t.size for t in self.named_parameters().values())

    def predict_proba(self, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
        """
        P(real) per image and voter in inference mode.

        Args:
            images: `[n, size, size, 3]` values in [0, 1].
            batch_size: Images per forward pass.

        Returns:
            Array of shape `[n, voter_count]`.
        """
        images = np.asarray(images)
        if images.ndim != 4:
            raise ShapeError(f"Expected a [n, h, w, 3] image batch, got shape {images.shape}")
        out = np.empty((images.shape[0], self.voter_count), dtype=np.float64)
        for start in range(0, images.shape[0], batch_size):
            chunk = Tensor(images[start : start + batch_size], dtype=self.dtype)
            probs = self.forward(chunk, training=False)
            for v, p in enumerate(probs):
                out[start : start + batch_size, v] = p.data[:, REAL_COLUMN]
        return out

    def recalibrate_batchnorm(self, images: np.ndarray, batch_size: int = 32) -> int:
        """
        Replace every batchnorm running statistic with its average over `images`.

        Chunk k (from 0) runs in training mode with momentum k/(k+1), which leaves the plain mean
        of the chunk statistics. A trailing single image joins the chunk before it. Parameters
        are left untouched.

        Returns:
            Number of chunks forwarded.
        """
        images = np.asarray(images)
        if images.ndim != 4:
            raise ShapeError(f"Expected a [n, h, w, 3] image batch, got shape {images.shape}")
        starts = list(range(0, images.shape[0], batch_size))
        if len(starts) > 1 and images.shape[0] - starts[-1] == 1:
            starts.pop()
        bounds = [*starts[1:], images.shape[0]]
        for k, (start, stop) in enumerate(zip(starts, bounds, strict=True)):
            with F.batchnorm_momentum(k / (k + 1)):
                self.forward(Tensor(images[start:stop], dtype=self.dtype), training=True)
        return len(starts)

    def vote(self, images: np.ndarray, batch_size: int = 32) -> list[VoteResult]:
        """Hard-vote every image of a batch."""
        return [hard_vote(votes_from_probs(row)) for row in self.predict_proba(images, batch_size)]

    def describe(self) -> dict[str, Any]:
        return {
            "arch": self.arch,
            "scheme": self.scheme.name,
            "profile": self.profile.name,
            "shared_heads": self.shared_heads,
            "dtype": self.dtype,
            "voters": self.voter_count,
        }

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(arch={self.arch!r}, scheme={self.scheme.name!r}, "
            f"profile={self.profile.name!r}, voters={self.voter_count})"
        )
