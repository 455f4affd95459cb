"""
Differentiable layer operations over NHWC tensors.

Spatial ops take a batch `[n, h, w, c]`; a single sample `[h, w, c]` is accepted and returned
without the batch axis. All convolutions are stride 1 with "same" zero padding and are computed as
a fixed-order sum of kh*kw shifted matrix products, which keeps accumulation deterministic.
"""

from collections.abc import Callable, Iterator
from contextlib import contextmanager
from contextvars import ContextVar

import numpy as np

from sepvote.autodiff.ops import add, reshape
from sepvote.autodiff.tensor import Tensor, record
from sepvote.errors import ShapeError

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.99
LEAKY_ALPHA = 0.1

_momentum_override: ContextVar[float | None] = ContextVar("sepvote_bn_momentum", default=None)


@contextmanager
def batchnorm_momentum(value: float) -> Iterator[None]:
    """Use `value` as the running-statistics momentum of every training-mode batchnorm call."""
    token = _momentum_override.set(value)
    try:
        yield
    finally:
        _momentum_override.reset(token)


def _spatial(op: Callable[[Tensor], Tensor], x: Tensor) -> Tensor:
    """Run a batched spatial op on `x`, promoting a single `[h, w, c]` sample."""
    if x.ndim == 4:
        return op(x)
    if x.ndim == 3:
        out = op(reshape(x, (1, *x.shape)))
        return reshape(out, out.shape[1:])
    raise ShapeError(f"Expected a [h, w, c] or [n, h, w, c] tensor, got shape {x.shape}")


def _pad_same(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    ph, pw = kh // 2, kw // 2
    return np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))


def _conv_nobias(x: Tensor, kernel: Tensor) -> Tensor:
    n, h, w, c_in = x.shape
    kh, kw, k_in, c_out = kernel.shape
    if k_in != c_in:
        raise ShapeError(f"Channel mismatch: input has {c_in} channels, kernel expects {k_in}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"Kernel dims must be odd, got {kh}x{kw}")
    xp = _pad_same(x.data, kh, kw)
    k = kernel.data
    out = np.zeros((n, h, w, c_out), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            out += xp[:, i : i + h, j : j + w, :] @ k[i, j]

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(k)
        g2 = g.reshape(-1, c_out)
        for i in range(kh):
            for j in range(kw):
                gxp[:, i : i + h, j : j + w, :] += g @ k[i, j].T
                gk[i, j] = xp[:, i : i + h, j : j + w, :].reshape(-1, c_in).T @ g2
        ph, pw = kh // 2, kw // 2
        return np.ascontiguousarray(gxp[:, ph : ph + h, pw : pw + w, :]), gk

    return record("conv2d", (x, kernel), out, rule)


def _depthwise(x: Tensor, kernel: Tensor) -> Tensor:
    n, h, w, c = x.shape
    kh, kw, k_c = kernel.shape
    if k_c != c:
        raise ShapeError(f"Channel mismatch: input has {c} channels, depthwise kernel has {k_c}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"Kernel dims must be odd, got {kh}x{kw}")
    xp = _pad_same(x.data, kh, kw)
    k = kernel.data
    out = np.zeros_like(x.data)
    for i in range(kh):
        for j in range(kw):
            out += xp[:, i : i + h, j : j + w, :] * k[i, j]

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(k)
        for i in range(kh):
            for j in range(kw):
                gxp[:, i : i + h, j : j + w, :] += g * k[i, j]
                gk[i, j] = (xp[:, i : i + h, j : j + w, :] * g).reshape(-1, c).sum(axis=0)
        ph, pw = kh // 2, kw // 2
        return np.ascontiguousarray(gxp[:, ph : ph + h, pw : pw + w, :]), gk

    return record("depthwise_conv2d", (x, kernel), out, rule)


def bias_add(x: Tensor, bias: Tensor) -> Tensor:
    """Add a per-channel bias along the last axis."""
    if bias.shape != (x.shape[-1],):
        raise ShapeError(f"Bias shape {bias.shape} does not match {x.shape[-1]} channels")
    out = x.data + bias.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g, g.reshape(-1, g.shape[-1]).sum(axis=0)

    return record("bias_add", (x, bias), out, rule)


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor | None = None) -> Tensor:
    """
    Same-padded, stride-1 cross-correlation.

    Args:
        x: Input `[h, w, c_in]` or `[n, h, w, c_in]`.
        kernel: Weights `[kh, kw, c_in, c_out]` with odd kh, kw.
        bias: Optional `[c_out]` bias.

    Returns:
        Output with the input's spatial dims and `c_out` channels.

    Raises:
        ValueError: Channel counts disagree or a kernel dim is even.
    """

    def op(xb: Tensor) -> Tensor:
        y = _conv_nobias(xb, kernel)
        return bias_add(y, bias) if bias is not None else y

    return _spatial(op, x)


def depthwise_conv2d(x: Tensor, kernel: Tensor) -> Tensor:
    """Per-channel same-padded convolution with kernel `[kh, kw, c]`."""
    return _spatial(lambda xb: _depthwise(xb, kernel), x)


def separable_conv2d(x: Tensor, pointwise: Tensor, depthwise: Tensor, bias: Tensor) -> Tensor:
    """
    Pointwise 1x1 convolution to `c_mid` channels, then a per-channel kh x kw convolution, then
    one bias per output channel.

    Args:
        x: Input `[h, w, c_in]` or `[n, h, w, c_in]`.
        pointwise: `[1, 1, c_in, c_mid]` channel-mixing weights.
        depthwise: `[kh, kw, c_mid]` spatial weights.
        bias: `[c_mid]` bias.
    """
    if pointwise.shape[:2] != (1, 1):
        raise ShapeError(f"Pointwise kernel must be 1x1, got {pointwise.shape}")

    def op(xb: Tensor) -> Tensor:
        return bias_add(_depthwise(_conv_nobias(xb, pointwise), depthwise), bias)

    return _spatial(op, x)


def batchnorm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: Tensor,
    running_var: Tensor,
    training: bool,
    epsilon: float = BN_EPSILON,
    momentum: float = BN_MOMENTUM,
) -> Tensor:
    """
    Per-channel batch normalisation over every axis but the last.

    In training mode the batch statistics normalise the input and the running statistics are
    updated in place as `running = momentum * running + (1 - momentum) * batch` (biased variance).
    In inference mode only the running statistics are used.
    Inside `batchnorm_momentum` the overriding momentum replaces `momentum`.

    Raises:
        ValueError: Training mode with fewer than two values per channel.
    """
    c = x.shape[-1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"BatchNorm parameters do not match {c} channels")
    axes = tuple(range(x.ndim - 1))
    xd = x.data
    count = xd.size // c

    if training:
        if count < 2:
            raise ShapeError("BatchNorm in training mode needs n*h*w >= 2")
        mu = xd.mean(axis=axes)
        var = xd.var(axis=axes)
        override = _momentum_override.get()
        if override is not None:
            momentum = override
        running_mean.data[...] = momentum * running_mean.data + (1 - momentum) * mu
        running_var.data[...] = momentum * running_var.data + (1 - momentum) * var
    else:
        mu = running_mean.data
        var = running_var.data

    inv = (1.0 / np.sqrt(var + epsilon)).astype(x.dtype)
    xhat = (xd - mu) * inv
    out = gamma.data * xhat + beta.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ggamma = (g * xhat).sum(axis=axes)
        gbeta = g.sum(axis=axes)
        gxhat = g * gamma.data
        if training:
            gx = (inv / count) * (
                count * gxhat - gxhat.sum(axis=axes) - xhat * (gxhat * xhat).sum(axis=axes)
            )
        else:
            gx = gxhat * inv
        return gx.astype(x.dtype), ggamma, gbeta

    return record("batchnorm", (x, gamma, beta), out, rule)


def relu(x: Tensor) -> Tensor:
    out = np.maximum(x.data, 0)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * (x.data > 0),)

    return record("relu", (x,), out, rule)


def leaky_relu(x: Tensor, alpha: float = LEAKY_ALPHA) -> Tensor:
    a = x.dtype.type(alpha)
    out = np.where(x.data > 0, x.data, a * x.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(x.data > 0, g, a * g),)

    return record("leaky_relu", (x,), out, rule)


def _maxpool(x: Tensor, k: int) -> Tensor:
    n, h, w, c = x.shape
    if k < 1 or h % k or w % k:
        raise ShapeError(f"Spatial dims {h}x{w} are not divisible by pool size {k}")
    ho, wo = h // k, w // k
    windows = x.data.reshape(n, ho, k, wo, k, c).transpose(0, 1, 3, 5, 2, 4).reshape(
        n, ho, wo, c, k * k
    )
    idx = windows.argmax(axis=-1)[..., None]
    out = np.take_along_axis(windows, idx, axis=-1)[..., 0]

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        gw = np.zeros_like(windows)
        np.put_along_axis(gw, idx, g[..., None], axis=-1)
        gx = gw.reshape(n, ho, wo, c, k, k).transpose(0, 1, 4, 2, 5, 3).reshape(n, h, w, c)
        return (gx,)

    return record("maxpool", (x,), out, rule)


def maxpool(x: Tensor, k: int) -> Tensor:
    """
    Non-overlapping k x k max pooling.

    The gradient of each window flows to its first maximal element in row-major order.

    Raises:
        ValueError: A spatial dim is not divisible by `k`.
    """
    return _spatial(lambda xb: _maxpool(xb, k), x)


def crop(x: Tensor, row_start: int, row_len: int, col_start: int, col_len: int) -> Tensor:
    """
    Slice a spatial window out of `x`, keeping every channel.

    Raises:
        ValueError: The window does not lie inside the input.
    """

    def op(xb: Tensor) -> Tensor:
        _, h, w, _ = xb.shape
        if (
            row_start < 0
            or col_start < 0
            or row_len < 1
            or col_len < 1
            or row_start + row_len > h
            or col_start + col_len > w
        ):
            raise ShapeError(
                f"Window rows {row_start}+{row_len}, cols {col_start}+{col_len} "
                f"is outside a {h}x{w} feature map"
            )
        rows = slice(row_start, row_start + row_len)
        cols = slice(col_start, col_start + col_len)
        out = np.ascontiguousarray(xb.data[:, rows, cols, :])

        def rule(g: np.ndarray) -> tuple[np.ndarray]:
            gx = np.zeros_like(xb.data)
            gx[:, rows, cols, :] = g
            return (gx,)

        return record("crop", (xb,), out, rule)

    return _spatial(op, x)


def global_avg_pool(x: Tensor) -> Tensor:
    """Per-channel spatial mean: `[n, h, w, c] -> [n, c]` (or `[h, w, c] -> [c]`)."""

    def op(xb: Tensor) -> Tensor:
        _, h, w, _ = xb.shape
        out = xb.data.mean(axis=(1, 2))

        def rule(g: np.ndarray) -> tuple[np.ndarray]:
            gx = np.broadcast_to(g[:, None, None, :] / (h * w), xb.shape)
            return (np.ascontiguousarray(gx, dtype=xb.dtype),)

        return record("global_avg_pool", (xb,), out, rule)

    if x.ndim == 3:
        return reshape(op(reshape(x, (1, *x.shape))), (x.shape[-1],))
    if x.ndim != 4:
        raise ShapeError(f"Expected a [h, w, c] or [n, h, w, c] tensor, got shape {x.shape}")
    return op(x)


def flatten(x: Tensor) -> Tensor:
    """Collapse every axis but the batch axis."""
    return reshape(x, (x.shape[0], -1))


def dense(x: Tensor, weights: Tensor, bias: Tensor) -> Tensor:
    """
    Affine map `x @ weights + bias` for `x` of shape `[d_in]` or `[n, d_in]`.

    Raises:
        ValueError: Dimensions do not match.
    """
    d_in, d_out = weights.shape
    if x.shape[-1] != d_in or bias.shape != (d_out,) or x.ndim not in (1, 2):
        raise ShapeError(
            f"Dense mismatch: input {x.shape}, weights {weights.shape}, bias {bias.shape}"
        )
    out = x.data @ weights.data + bias.data

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g2 = g.reshape(-1, d_out)
        x2 = x.data.reshape(-1, d_in)
        return g @ weights.data.T, x2.T @ g2, g2.sum(axis=0)

    return record("dense", (x, weights, bias), out, rule)


def softmax(logits: Tensor) -> Tensor:
    """Softmax along the last axis, computed with max subtraction."""
    z = logits.data - logits.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=-1, keepdims=True)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return record("softmax", (logits,), out, rule)


def residual_add(
    x: Tensor,
    y: Tensor,
    projection: tuple[Tensor, Tensor] | None = None,
) -> Tensor:
    """
    Elementwise sum of a skip input `x` and a branch output `y`.

    Args:
        x: Skip input `[.., h, w, c_x]`.
        y: Branch output `[.., h, w, c_y]`.
        projection: Optional `(kernel [1, 1, c_x, c_y], bias [c_y])` applied to `x` first.

    Raises:
        ValueError: Spatial dims differ, or channels differ and no projection is given.
    """
    if x.shape[:-1] != y.shape[:-1]:
        raise ShapeError(f"Residual spatial mismatch: {x.shape} vs {y.shape}")
    if projection is not None:
        kernel, bias = projection
        if kernel.shape[:2] != (1, 1):
            raise ShapeError(f"Residual projection must be 1x1, got {kernel.shape}")
        x = conv2d(x, kernel, bias)
    if x.shape != y.shape:
        raise ShapeError(f"Residual channel mismatch {x.shape} vs {y.shape} without projection")
    return add(x, y)
