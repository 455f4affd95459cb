"""
Network builders.

`build_feature_extractor`, `build_smodel`, `build_mesonet` and `build_segmented_mesonet` return
unbuilt layer graphs (architecture only, no parameters). `build_ensemble` and `build_detector`
allocate parameters from a seeded generator and return ready-to-train detectors.
"""

from sepvote.autodiff.rng import Rng
from sepvote.errors import ShapeError, UsageError
from sepvote.models.ensemble import EnsembleModel, LayeredDetector
from sepvote.models.profiles import Profile, get_profile
from sepvote.models.spec import ModelSpec
from sepvote.nn.layers import (
    Activation,
    BatchNorm,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    MaxPool2D,
    ResidualBlock,
    Segment,
    SeparableConv2D,
)
from sepvote.segmentation.plan import plan_blocks
from sepvote.segmentation.scheme import SegmentationScheme, get_scheme

SMODEL_MIN_SIDE = 4
MESONET_CHANNELS = (8, 8, 16, 16)
MESONET_KERNELS = (3, 5, 5, 5)
MESONET_HEAD_CHANNELS = 256
MESONET_HEAD_KERNEL = 5


def build_feature_extractor(profile: Profile | None = None) -> ModelSpec:
    """
    Three stages of [conv 3x3 -> batchnorm -> relu -> maxpool 2].

    For the full profile this maps 256x256x3 to the 32x32x128 latent map.
    """
    profile = profile or get_profile("full")
    spec = ModelSpec("extractor", profile.input_shape)
    for channels in profile.extractor_channels:
        spec.add(Conv2D(channels, 3))
        spec.add(BatchNorm())
        spec.add(Activation("relu"))
        spec.add(MaxPool2D(2))
    spec.mark_output(spec.layers[-1].name or "")
    return spec


def build_smodel(
    input_channels: int,
    block_shape: tuple[int, int] = (16, 16),
    profile: Profile | None = None,
    separable: bool = True,
    size_agnostic: bool = False,
) -> ModelSpec:
    """
    Per-block classifier head.

    Two residual stages (each conv -> BN -> relu -> conv -> BN with a 1x1-projected skip), a
    2x max pool between them, global average pooling and a 2-way softmax.

    Args:
        input_channels: Channels of the latent block.
        block_shape: Spatial size of the block the head is declared for.
        profile: Supplies the two stage widths.
        separable: Use separable convolutions; False gives the standard-convolution twin.
        size_agnostic: Accept blocks of any spatial size at forward time.

    Raises:
        ValueError: The block is smaller than 4 along either side.
    """
    profile = profile or get_profile("full")
    h, w = block_shape
    if min(h, w) < SMODEL_MIN_SIDE:
        raise ShapeError(
            f"SModel needs blocks of at least {SMODEL_MIN_SIDE}x{SMODEL_MIN_SIDE}, got {h}x{w}"
        )
    first, second = profile.smodel_channels
    spec = ModelSpec("smodel", (h, w, input_channels), size_agnostic=size_agnostic)
    spec.add(ResidualBlock(first, 3, separable=separable))
    spec.add(MaxPool2D(2, trim=True))
    spec.add(ResidualBlock(second, 3, separable=separable))
    spec.add(GlobalAvgPool())
    spec.mark_output(spec.add(Dense(2, "softmax")))
    return spec


def _mesonet_front(spec: ModelSpec, final_pool: bool) -> str:
    for i, (channels, kernel) in enumerate(zip(MESONET_CHANNELS, MESONET_KERNELS, strict=True)):
        spec.add(Conv2D(channels, kernel, activation="relu"))
        last = spec.add(BatchNorm())
        if i < len(MESONET_CHANNELS) - 1:
            spec.add(MaxPool2D(2))
    if final_pool:
        last = spec.add(MaxPool2D(4))
    return last


def build_mesonet(profile: Profile | None = None) -> ModelSpec:
    """The Mesonet baseline: four conv/BN/pool stages and three dense layers."""
    profile = profile or get_profile("full")
    spec = ModelSpec("mesonet", profile.input_shape)
    _mesonet_front(spec, final_pool=True)
    spec.add(Flatten())
    spec.add(Dense(1024, "relu"))
    spec.add(Dense(16, "leaky_relu"))
    spec.mark_output(spec.add(Dense(2, "softmax")))
    return spec


def build_segmented_mesonet(
    scheme: SegmentationScheme | str, profile: Profile | None = None
) -> ModelSpec:
    """
    Mesonet front half up to BatchNorm_4, then one head per block of `scheme`:
    segment -> separable conv 5x5 (256, relu) -> batchnorm -> global average pool -> softmax(2).

    Layers are added stage by stage across heads, so head k owns Segmentlayer_k,
    SeparableConv2D_k, BatchNorm_(4+k), GlobalAvgPool_k and FullyConnected_k.
    """
    scheme = get_scheme(scheme) if isinstance(scheme, str) else scheme
    profile = profile or get_profile("full")
    spec = ModelSpec(f"mesonet-seg-{scheme.name}", profile.input_shape)
    front = _mesonet_front(spec, final_pool=False)
    h, w, _ = spec.shapes()[front]
    plan = plan_blocks(scheme, h, w)

    previous = [
        spec.add(Segment(b.row_start, b.row_len, b.col_start, b.col_len), front) for b in plan
    ]
    stages = (
        lambda: SeparableConv2D(MESONET_HEAD_CHANNELS, MESONET_HEAD_KERNEL, activation="relu"),
        BatchNorm,
        GlobalAvgPool,
        lambda: Dense(2, "softmax"),
    )
    for make in stages:
        previous = [spec.add(make(), prev) for prev in previous]
    spec.mark_output(*previous)
    return spec


def build_ensemble(
    scheme: SegmentationScheme | str,
    profile: Profile | None = None,
    rng: Rng | None = None,
    shared_heads: bool = False,
    dtype: str = "f32",
) -> EnsembleModel:
    """
    Build and initialise the extractor + SModel voting ensemble.

    The extractor draws from `rng.spawn(0)` and head i from `rng.spawn(i + 1)`.

    Raises:
        UsageError: A block of the scheme is too small for the SModel on this profile.
    """
    scheme = get_scheme(scheme) if isinstance(scheme, str) else scheme
    profile = profile or get_profile("full")
    rng = rng or Rng(0)
    extractor = build_feature_extractor(profile).build(rng.spawn(0), dtype)
    side = profile.latent_size
    plan = plan_blocks(scheme, side, side)

    small = [b for b in plan if min(b.shape) < SMODEL_MIN_SIDE]
    if small:
        raise UsageError(
            f"Scheme '{scheme.name}' yields {small[0].row_len}x{small[0].col_len} blocks on the "
            f"{side}x{side} latent map of profile '{profile.name}'; the proposed architecture "
            f"needs blocks of at least {SMODEL_MIN_SIDE}x{SMODEL_MIN_SIDE}"
        )

    channels = profile.latent_channels
    if shared_heads:
        largest = max(plan, key=lambda b: b.area)
        heads = [
            build_smodel(channels, largest.shape, profile, size_agnostic=True).build(
                rng.spawn(1), dtype
            )
        ]
    else:
        heads = [
            build_smodel(channels, block.shape, profile).build(rng.spawn(i + 1), dtype)
            for i, block in enumerate(plan)
        ]
    return EnsembleModel(extractor, scheme, plan, heads, profile, dtype, shared_heads)


def build_mesonet_detector(
    scheme: SegmentationScheme | str = "ori",
    profile: Profile | None = None,
    rng: Rng | None = None,
    shared_heads: bool = False,
    dtype: str = "f32",
) -> LayeredDetector:
    """
    Build and initialise the Mesonet baseline.

    Raises:
        UsageError: A scheme other than "ori" or shared heads are requested.
    """
    scheme = get_scheme(scheme) if isinstance(scheme, str) else scheme
    if scheme.name != "ori" or shared_heads:
        raise UsageError("The mesonet architecture has a single head; use --scheme ori")
    profile = profile or get_profile("full")
    graph = build_mesonet(profile).build((rng or Rng(0)).spawn(0), dtype)
    return LayeredDetector("mesonet", graph, scheme, profile, dtype)


def build_segmented_mesonet_detector(
    scheme: SegmentationScheme | str,
    profile: Profile | None = None,
    rng: Rng | None = None,
    shared_heads: bool = False,
    dtype: str = "f32",
) -> LayeredDetector:
    """
    Build and initialise the segmented Mesonet for `scheme`.

    Raises:
        UsageError: Shared heads are requested (each head owns its layers).
    """
    if shared_heads:
        raise UsageError("Shared heads are only available for the proposed architecture")
    scheme = get_scheme(scheme) if isinstance(scheme, str) else scheme
    profile = profile or get_profile("full")
    graph = build_segmented_mesonet(scheme, profile).build((rng or Rng(0)).spawn(0), dtype)
    return LayeredDetector("mesonet-seg", graph, scheme, profile, dtype)
