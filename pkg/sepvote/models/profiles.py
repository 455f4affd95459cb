"""Size profiles: the full 256x256 configuration and a desk-scale variant."""

import os
from dataclasses import dataclass

from sepvote.errors import UsageError

# Total downsampling of the extractor and of the Mesonet front half (three 2x pools).
LATENT_STRIDE = 8


@dataclass(frozen=True)
class Profile:
    """
    Input size and channel widths shared by every architecture.

    Attributes:
        name: Profile name used on the command line.
        input_size: Side of the square RGB input.
        extractor_channels: Output channels of the three extractor stages.
        smodel_channels: Output channels of the two SModel residual stages.
    """

    name: str
    input_size: int
    extractor_channels: tuple[int, int, int]
    smodel_channels: tuple[int, int]

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.input_size, self.input_size, 3)

    @property
    def latent_size(self) -> int:
        return self.input_size // LATENT_STRIDE

    @property
    def latent_channels(self) -> int:
        return self.extractor_channels[-1]


PROFILES: dict[str, Profile] = {
    "full": Profile("full", 256, (32, 64, 128), (128, 256)),
    "desk": Profile("desk", 64, (16, 32, 64), (64, 128)),
}

DEFAULT_PROFILE = "full"


def get_profile(name: str | None = None) -> Profile:
    """
    Look up a profile by name; `None` falls back to `SEPVOTE_PROFILE`, then "full".

    Raises:
        UsageError: The name is not a known profile.
    """
    key = (name or os.getenv("SEPVOTE_PROFILE") or DEFAULT_PROFILE).strip().lower()
    try:
        return PROFILES[key]
    except KeyError:
        available = list(PROFILES.keys())
        raise UsageError(f"Unknown profile: '{key}'. Available profiles: {available}") from None
