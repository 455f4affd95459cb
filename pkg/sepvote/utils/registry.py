"""Registry of detector architectures."""

from collections.abc import Callable

from sepvote.autodiff.rng import Rng
from sepvote.errors import UsageError
from sepvote.models.base import Detector
from sepvote.models.profiles import Profile
from sepvote.models.zoo import (
    build_ensemble,
    build_mesonet_detector,
    build_segmented_mesonet_detector,
)
from sepvote.segmentation.scheme import SegmentationScheme

DetectorBuilder = Callable[..., Detector]


class ArchitectureRegistry:
    """
    Registry for storing and retrieving detector builders by architecture name.

    Resolving builders dynamically enables CLI options such as `--arch mesonet-seg`.
    """

    def __init__(self) -> None:
        self._registry: dict[str, DetectorBuilder] = {}

    def register(self, key: str, builder: DetectorBuilder) -> None:
        """
        Register a detector builder.

        Args:
            key: Architecture name, for example `"proposed"`.
            builder: Callable taking `(scheme, profile, rng, shared_heads, dtype)`.
        """
        self._registry[key] = builder

    def get(self, key: str) -> DetectorBuilder:
        """
        Retrieve the builder registered for an architecture.

        Raises:
            UsageError: The architecture is not registered.
        """
        try:
            return self._registry[key]
        except KeyError:
            available = list(self._registry.keys())
            raise UsageError(
                f"Unknown architecture: '{key}'. Available architectures: {available}"
            ) from None

    def names(self) -> list[str]:
        return list(self._registry.keys())

    def build(
        self,
        key: str,
        scheme: SegmentationScheme,
        profile: Profile,
        seed: int,
        shared_heads: bool = False,
        dtype: str = "f32",
    ) -> Detector:
        """Build and initialise the detector registered under `key`."""
        return self.get(key)(scheme, profile, Rng(seed), shared_heads, dtype)


# Initialize registry
architecture_registry = ArchitectureRegistry()

# Register architectures
architecture_registry.register("proposed", build_ensemble)
architecture_registry.register("mesonet", build_mesonet_detector)
architecture_registry.register("mesonet-seg", build_segmented_mesonet_detector)
