"""Parameterised layers built on `sepvote.nn.functional`."""

from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np

from sepvote.autodiff.init import constant_init, he_normal_init
from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError
from sepvote.nn import functional as F

Shape = tuple[int, ...]

ACTIVATIONS = {
    "relu": F.relu,
    "leaky_relu": F.leaky_relu,
    "softmax": F.softmax,
}


def _activate(x: Tensor, activation: str | None) -> Tensor:
    if activation is None:
        return x
    try:
        return ACTIVATIONS[activation](x)
    except KeyError:
        raise ShapeError(
            f"Unknown activation: '{activation}'. Available: {sorted(ACTIVATIONS)}"
        ) from None


def _display_activation(activation: str | None) -> str:
    return {"leaky_relu": "Leakyrelu"}.get(activation or "", activation or "")


class Layer(ABC):
    """
    Base interface for network layers.

    A layer is declared with its hyperparameters, then `build` allocates its parameters for a
    concrete per-sample input shape. Shapes exclude the batch axis.

    Attributes:
        kind: Display name used for automatic layer naming ("Conv2D", "BatchNorm", ...).
        name: Unique name within the owning model, assigned by the model if not given.
    """

    kind: ClassVar[str] = "Layer"

    def __init__(self, name: str | None = None) -> None:
        self.name = name
        self._params: dict[str, Tensor] = {}
        self._buffers: dict[str, Tensor] = {}

    @abstractmethod
    def output_shape(self, input_shape: Shape) -> Shape:
        """
        Return the per-sample output shape for `input_shape`.

        Raises:
            ValueError: The input shape is incompatible with the layer.
        """

    @abstractmethod
    def forward(self, x: Tensor, training: bool) -> Tensor:
        """Apply the layer to a batch."""

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        """Allocate parameters for `input_shape` and return the output shape."""
        return self.output_shape(input_shape)

    def parameters(self) -> dict[str, Tensor]:
        """Trainable tensors keyed by local name."""
        return dict(self._params)

    def buffers(self) -> dict[str, Tensor]:
        """Non-trainable state (running statistics) keyed by local name."""
        return dict(self._buffers)

    @property
    def trainable_count(self) -> int:
        return sum(p.size for p in self.parameters().values())

    @property
    def non_trainable_count(self) -> int:
        return sum(b.size for b in self.buffers().values())

    @property
    def kernel_size(self) -> tuple[int, int] | None:
        return None

    @property
    def activation_name(self) -> str:
        return ""

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r})"


def _require_rank3(input_shape: Shape, kind: str) -> None:
    if len(input_shape) != 3:
        raise ShapeError(f"{kind} expects a [h, w, c] input, got {input_shape}")


class Conv2D(Layer):
    """Standard same-padded convolution with bias and optional activation."""

    kind = "Conv2D"

    def __init__(
        self, filters: int, kernel: int, activation: str | None = None, name: str | None = None
    ) -> None:
        super().__init__(name)
        if kernel % 2 == 0:
            raise ShapeError(f"Kernel size must be odd, got {kernel}")
        self.filters = filters
        self.kernel = kernel
        self.activation = activation

    def output_shape(self, input_shape: Shape) -> Shape:
        _require_rank3(input_shape, self.kind)
        h, w, _ = input_shape
        return (h, w, self.filters)

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        out = self.output_shape(input_shape)
        c_in = input_shape[-1]
        k = self.kernel
        self._params = {
            "kernel": he_normal_init(rng, (k, k, c_in, self.filters), k * k * c_in, dtype),
            "bias": constant_init((self.filters,), 0.0, dtype),
        }
        return out

    def forward(self, x: Tensor, training: bool) -> Tensor:
        y = F.conv2d(x, self._params["kernel"], self._params["bias"])
        return _activate(y, self.activation)

    @property
    def kernel_size(self) -> tuple[int, int]:
        return (self.kernel, self.kernel)

    @property
    def activation_name(self) -> str:
        return _display_activation(self.activation)


class SeparableConv2D(Layer):
    """Pointwise 1x1 convolution followed by a per-channel spatial convolution and a bias."""

    kind = "SeparableConv2D"

    def __init__(
        self, filters: int, kernel: int, activation: str | None = None, name: str | None = None
    ) -> None:
        super().__init__(name)
        if kernel % 2 == 0:
            raise ShapeError(f"Kernel size must be odd, got {kernel}")
        self.filters = filters
        self.kernel = kernel
        self.activation = activation

    def output_shape(self, input_shape: Shape) -> Shape:
        _require_rank3(input_shape, self.kind)
        h, w, _ = input_shape
        return (h, w, self.filters)

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        out = self.output_shape(input_shape)
        c_in = input_shape[-1]
        k = self.kernel
        self._params = {
            "pointwise": he_normal_init(rng, (1, 1, c_in, self.filters), c_in, dtype),
            "depthwise": he_normal_init(rng, (k, k, self.filters), k * k, dtype),
            "bias": constant_init((self.filters,), 0.0, dtype),
        }
        return out

    def forward(self, x: Tensor, training: bool) -> Tensor:
        p = self._params
        y = F.separable_conv2d(x, p["pointwise"], p["depthwise"], p["bias"])
        return _activate(y, self.activation)

    @property
    def kernel_size(self) -> tuple[int, int]:
        return (self.kernel, self.kernel)

    @property
    def activation_name(self) -> str:
        return _display_activation(self.activation)


class BatchNorm(Layer):
    """Batch normalisation with running statistics."""

    kind = "BatchNorm"

    def __init__(
        self,
        epsilon: float = F.BN_EPSILON,
        momentum: float = F.BN_MOMENTUM,
        name: str | None = None,
    ) -> None:
        super().__init__(name)
        self.epsilon = epsilon
        self.momentum = momentum

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        c = input_shape[-1]
        self._params = {
            "gamma": constant_init((c,), 1.0, dtype),
            "beta": constant_init((c,), 0.0, dtype),
        }
        self._buffers = {
            "running_mean": constant_init((c,), 0.0, dtype, requires_grad=False),
            "running_var": constant_init((c,), 1.0, dtype, requires_grad=False),
        }
        return self.output_shape(input_shape)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        p, b = self._params, self._buffers
        return F.batchnorm(
            x,
            p["gamma"],
            p["beta"],
            b["running_mean"],
            b["running_var"],
            training,
            self.epsilon,
            self.momentum,
        )


class Activation(Layer):
    """Stand-alone activation layer."""

    kind = "Activation"

    def __init__(self, activation: str, name: str | None = None) -> None:
        super().__init__(name)
        if activation not in ACTIVATIONS:
            raise ShapeError(f"Unknown activation: '{activation}'")
        self.activation = activation

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        return _activate(x, self.activation)

    @property
    def activation_name(self) -> str:
        return _display_activation(self.activation)


class MaxPool2D(Layer):
    """
    Non-overlapping max pooling.

    With `trim=True` an odd trailing row or column is dropped before pooling ("valid" pooling),
    so any spatial size >= pool is accepted.
    """

    kind = "MaxPooling"

    def __init__(self, pool: int, trim: bool = False, name: str | None = None) -> None:
        super().__init__(name)
        self.pool = pool
        self.trim = trim

    def output_shape(self, input_shape: Shape) -> Shape:
        _require_rank3(input_shape, self.kind)
        h, w, c = input_shape
        k = self.pool
        if self.trim:
            if h < k or w < k:
                raise ShapeError(f"Spatial dims {h}x{w} are smaller than pool size {k}")
        elif h % k or w % k:
            raise ShapeError(f"Spatial dims {h}x{w} are not divisible by pool size {k}")
        return (h // k, w // k, c)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        if self.trim:
            h, w = x.shape[-3], x.shape[-2]
            k = self.pool
            if h % k or w % k:
                x = F.crop(x, 0, h - h % k, 0, w - w % k)
        return F.maxpool(x, self.pool)

    @property
    def kernel_size(self) -> tuple[int, int]:
        return (self.pool, self.pool)


class GlobalAvgPool(Layer):
    kind = "GlobalAvgPool"

    def output_shape(self, input_shape: Shape) -> Shape:
        _require_rank3(input_shape, self.kind)
        return (input_shape[-1],)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        return F.global_avg_pool(x)


class Flatten(Layer):
    kind = "Flatten"

    def output_shape(self, input_shape: Shape) -> Shape:
        return (int(np.prod(input_shape)),)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        return F.flatten(x)


class Dense(Layer):
    """Fully connected layer with optional activation."""

    kind = "FullyConnected"

    def __init__(self, units: int, activation: str | None = None, name: str | None = None) -> None:
        super().__init__(name)
        self.units = units
        self.activation = activation

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 1:
            raise ShapeError(f"{self.kind} expects a flat input, got {input_shape}")
        return (self.units,)

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        out = self.output_shape(input_shape)
        d_in = input_shape[0]
        self._params = {
            "weights": he_normal_init(rng, (d_in, self.units), d_in, dtype),
            "bias": constant_init((self.units,), 0.0, dtype),
        }
        return out

    def forward(self, x: Tensor, training: bool) -> Tensor:
        y = F.dense(x, self._params["weights"], self._params["bias"])
        return _activate(y, self.activation)

    @property
    def activation_name(self) -> str:
        return _display_activation(self.activation)


class Segment(Layer):
    """Fixed spatial window of a feature map (one voter block)."""

    kind = "Segmentlayer"

    def __init__(
        self, row_start: int, row_len: int, col_start: int, col_len: int, name: str | None = None
    ) -> None:
        super().__init__(name)
        self.row_start = row_start
        self.row_len = row_len
        self.col_start = col_start
        self.col_len = col_len

    def output_shape(self, input_shape: Shape) -> Shape:
        _require_rank3(input_shape, self.kind)
        h, w, c = input_shape
        if self.row_start + self.row_len > h or self.col_start + self.col_len > w:
            raise ShapeError(f"Segment window exceeds a {h}x{w} feature map")
        return (self.row_len, self.col_len, c)

    def forward(self, x: Tensor, training: bool) -> Tensor:
        if (self.row_start, self.col_start) == (0, 0) and x.shape[-3:-1] == (
            self.row_len,
            self.col_len,
        ):
            return x
        return F.crop(x, self.row_start, self.row_len, self.col_start, self.col_len)


class ResidualBlock(Layer):
    """
    Two-convolution residual stage with a 1x1-projected skip connection:
    conv -> BN -> relu -> conv -> BN, added to the projected input, then relu.

    `separable=False` swaps the separable convolutions for standard ones, which is used to
    compare parameter counts.
    """

    kind = "Residual"

    def __init__(
        self, filters: int, kernel: int = 3, separable: bool = True, name: str | None = None
    ) -> None:
        super().__init__(name)
        conv = SeparableConv2D if separable else Conv2D
        self.filters = filters
        self.separable = separable
        self.branch: list[Layer] = [
            conv(filters, kernel, name="conv_a"),
            BatchNorm(name="bn_a"),
            Activation("relu", name="relu_a"),
            conv(filters, kernel, name="conv_b"),
            BatchNorm(name="bn_b"),
        ]
        self.projection = Conv2D(filters, 1, name="projection")

    def output_shape(self, input_shape: Shape) -> Shape:
        shape = tuple(input_shape)
        for layer in self.branch:
            shape = layer.output_shape(shape)
        return shape

    def build(self, input_shape: Shape, rng: Rng, dtype: str = "f32") -> Shape:
        shape = tuple(input_shape)
        for layer in self.branch:
            shape = layer.build(shape, rng, dtype)
        self.projection.build(input_shape, rng, dtype)
        return shape

    def _collect(self, attr: str) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for layer in [*self.branch, self.projection]:
            for key, tensor in getattr(layer, attr)().items():
                out[f"{layer.name}.{key}"] = tensor
        return out

    def parameters(self) -> dict[str, Tensor]:
        return self._collect("parameters")

    def buffers(self) -> dict[str, Tensor]:
        return self._collect("buffers")

    def forward(self, x: Tensor, training: bool) -> Tensor:
        y = x
        for layer in self.branch:
            y = layer.forward(y, training)
        p = self.projection.parameters()
        return F.relu(F.residual_add(x, y, (p["kernel"], p["bias"])))

    @property
    def kernel_size(self) -> tuple[int, int]:
        return self.branch[0].kernel_size  # type: ignore[return-value]

    @property
    def activation_name(self) -> str:
        return "relu"
