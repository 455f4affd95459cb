"""Layer vocabulary: convolutions, normalisation, pooling, dense heads and residual stages."""

from sepvote.nn.layers import (
    Activation,
    BatchNorm,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    Layer,
    MaxPool2D,
    ResidualBlock,
    Segment,
    SeparableConv2D,
)

__all__ = [
    "Activation",
    "BatchNorm",
    "Conv2D",
    "Dense",
    "Flatten",
    "GlobalAvgPool",
    "Layer",
    "MaxPool2D",
    "ResidualBlock",
    "Segment",
    "SeparableConv2D",
]
