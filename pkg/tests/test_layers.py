"""Tests for layer operations and parameterised layers."""

import numpy as np
import pytest

from sepvote.autodiff.ops import sum_all
from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tape, Tensor, backward
from sepvote.errors import ShapeError
from sepvote.nn import functional as F
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


def _t(values, requires_grad=False):
    return Tensor(np.asarray(values, dtype=np.float64), requires_grad=requires_grad)


def _naive_conv(x, k, b):
    h, w, c_in = x.shape
    kh, kw, _, c_out = k.shape
    xp = np.pad(x, ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0)))
    out = np.zeros((h, w, c_out))
    for i in range(h):
        for j in range(w):
            for o in range(c_out):
                total = b[o]
                for a in range(kh):
                    for d in range(kw):
                        for c in range(c_in):
                            total += xp[i + a, j + d, c] * k[a, d, c, o]
                out[i, j, o] = total
    return out


class TestConvolutions:
    """Tests for standard and separable convolutions."""

    def test_conv2d_matches_loops(self, rng):
        x = rng.normal((5, 5, 2), dtype=np.float64)
        k = rng.normal((3, 3, 2, 4), dtype=np.float64)
        b = rng.normal((4,), dtype=np.float64)
        out = F.conv2d(_t(x), _t(k), _t(b))
        assert out.shape == (5, 5, 4)
        np.testing.assert_allclose(out.data, _naive_conv(x, k, b), atol=1e-6)

    def test_conv2d_keeps_spatial_size(self):
        """A 256x256x3 input with a 3x3 kernel to 8 channels gives 256x256x8."""
        out = F.conv2d(Tensor(np.zeros((256, 256, 3))), Tensor(np.zeros((3, 3, 3, 8))))
        assert out.shape == (256, 256, 8)

    def test_conv2d_channel_mismatch(self):
        with pytest.raises(ShapeError, match="Channel mismatch"):
            F.conv2d(Tensor(np.zeros((4, 4, 2))), Tensor(np.zeros((3, 3, 3, 1))))

    def test_separable_is_pointwise_then_depthwise(self, rng):
        x = _t(rng.normal((2, 6, 6, 3), dtype=np.float64))
        pw = _t(rng.normal((1, 1, 3, 5), dtype=np.float64))
        dw = _t(rng.normal((3, 3, 5), dtype=np.float64))
        b = _t(rng.normal((5,), dtype=np.float64))
        composed = F.bias_add(F.depthwise_conv2d(F.conv2d(x, pw), dw), b)
        np.testing.assert_allclose(
            F.separable_conv2d(x, pw, dw, b).data, composed.data, atol=1e-6
        )

    def test_separable_table_shape(self):
        """A 10x32x16 block through a 5x5 separable conv to 256 channels gives 10x32x256."""
        layer = SeparableConv2D(256, 5)
        assert layer.build((10, 32, 16), Rng(0)) == (10, 32, 256)
        assert layer.trainable_count == 16 * 256 + 25 * 256 + 256

    def test_separable_has_fewer_parameters(self):
        sep = SeparableConv2D(256, 5)
        std = Conv2D(256, 5)
        sep.build((8, 8, 16), Rng(0))
        std.build((8, 8, 16), Rng(0))
        assert sep.trainable_count == 10_752
        assert std.trainable_count == 102_656
        assert sep.trainable_count < std.trainable_count

    def test_even_kernel_rejected(self):
        with pytest.raises(ShapeError):
            Conv2D(4, 2)


class TestBatchNorm:
    """Tests for batch normalisation."""

    def test_training_output_is_centred(self, rng):
        x = _t(rng.normal((4, 3, 3, 2), dtype=np.float64) * 3.0 + 2.0)
        gamma, beta = _t(np.ones(2)), _t(np.zeros(2))
        mean, var = _t(np.zeros(2)), _t(np.ones(2))
        out = F.batchnorm(x, gamma, beta, mean, var, training=True)
        assert np.all(np.abs(out.data.mean(axis=(0, 1, 2))) <= 1e-5)

    def test_running_statistics_update(self):
        x = _t(np.arange(8.0).reshape(2, 2, 2, 1))
        mean, var = _t(np.zeros(1)), _t(np.ones(1))
        F.batchnorm(x, _t([1.0]), _t([0.0]), mean, var, training=True)
        assert mean.data[0] == pytest.approx(0.01 * 3.5)
        assert var.data[0] == pytest.approx(0.99 + 0.01 * np.var(np.arange(8.0)))

    def test_momentum_override_is_scoped(self):
        x = _t(np.arange(8.0).reshape(2, 2, 2, 1))
        mean, var = _t(np.zeros(1)), _t(np.ones(1))
        with F.batchnorm_momentum(0.0):
            F.batchnorm(x, _t([1.0]), _t([0.0]), mean, var, training=True)
        assert mean.data[0] == pytest.approx(3.5)
        assert var.data[0] == pytest.approx(np.var(np.arange(8.0)))
        F.batchnorm(_t(x.data + 10.0), _t([1.0]), _t([0.0]), mean, var, training=True)
        assert mean.data[0] == pytest.approx(0.99 * 3.5 + 0.01 * 13.5)

    def test_inference_uses_running_statistics(self):
        x = _t(np.full((1, 1, 1, 1), 3.0))
        out = F.batchnorm(x, _t([2.0]), _t([1.0]), _t([1.0]), _t([4.0]), training=False)
        assert out.item() == pytest.approx(2.0 * (3.0 - 1.0) / np.sqrt(4.0 + 1e-5) + 1.0)

    def test_single_value_in_training(self):
        with pytest.raises(ShapeError):
            F.batchnorm(
                _t(np.ones((1, 1, 1, 1))), _t([1.0]), _t([0.0]), _t([0.0]), _t([1.0]), True
            )


class TestActivationsAndPooling:
    """Tests for activations, pooling, dense and softmax."""

    @pytest.mark.parametrize("fn, slope", [(F.relu, 0.0), (F.leaky_relu, 0.1)])
    def test_gradient_below_zero(self, fn, slope):
        x = _t([-1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            loss = sum_all(fn(x))
        grads = backward(tape, loss)
        assert grads[x.id].data.tolist() == pytest.approx([slope, 1.0])

    def test_maxpool_shapes(self):
        assert F.maxpool(Tensor(np.zeros((256, 256, 8))), 2).shape == (128, 128, 8)
        assert F.maxpool(Tensor(np.zeros((32, 32, 16))), 4).shape == (8, 8, 16)
        with pytest.raises(ShapeError):
            F.maxpool(Tensor(np.zeros((5, 4, 1))), 2)

    def test_maxpool_gradient_goes_to_first_maximum(self):
        x = _t(np.array([1.0, 3.0, 3.0, 0.0]).reshape(1, 2, 2, 1), requires_grad=True)
        with Tape() as tape:
            loss = sum_all(F.maxpool(x, 2))
        grads = backward(tape, loss)
        assert grads[x.id].data.reshape(-1).tolist() == [0.0, 1.0, 0.0, 0.0]

    def test_global_avg_pool_is_mean(self, rng):
        x = rng.normal((32, 32, 256), dtype=np.float64)
        out = F.global_avg_pool(_t(x))
        assert out.shape == (256,)
        np.testing.assert_allclose(out.data, x.mean(axis=(0, 1)), atol=1e-7)

    def test_dense_matches_loops(self, rng):
        x = rng.normal((1024,), dtype=np.float64)
        w = rng.normal((1024, 16), dtype=np.float64)
        b = rng.normal((16,), dtype=np.float64)
        out = F.dense(_t(x), _t(w), _t(b))
        expected = [sum(x[i] * w[i, j] for i in range(1024)) + b[j] for j in range(16)]
        assert out.shape == (16,)
        np.testing.assert_allclose(out.data, expected, atol=1e-9)

    def test_softmax_sums_to_one(self, rng):
        out = F.softmax(_t(rng.normal((5, 2), dtype=np.float64) * 50))
        np.testing.assert_allclose(out.data.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(out.data >= 0)

    def test_residual_add(self, rng):
        x = rng.normal((2, 3, 3, 4), dtype=np.float64)
        y = rng.normal((2, 3, 3, 4), dtype=np.float64)
        np.testing.assert_array_equal(F.residual_add(_t(x), _t(y)).data, x + y)
        with pytest.raises(ShapeError):
            F.residual_add(_t(x), _t(np.zeros((2, 3, 3, 5))))

    def test_crop_bounds(self):
        x = Tensor(np.zeros((4, 4, 1)))
        assert F.crop(x, 1, 2, 0, 4).shape == (2, 4, 1)
        with pytest.raises(ShapeError):
            F.crop(x, 3, 2, 0, 1)


class TestLayers:
    """Tests for parameterised layers."""

    def test_output_shapes(self):
        assert MaxPool2D(2).output_shape((8, 8, 3)) == (4, 4, 3)
        assert MaxPool2D(2, trim=True).output_shape((5, 5, 3)) == (2, 2, 3)
        assert GlobalAvgPool().output_shape((4, 4, 7)) == (7,)
        assert Flatten().output_shape((8, 8, 16)) == (1024,)
        assert Segment(0, 10, 0, 32).output_shape((32, 32, 16)) == (10, 32, 16)
        with pytest.raises(ShapeError):
            Segment(30, 10, 0, 32).output_shape((32, 32, 16))

    def test_dense_parameter_count(self):
        layer = Dense(16, "leaky_relu")
        layer.build((1024,), Rng(0))
        assert layer.trainable_count == 16_400
        assert layer.activation_name == "Leakyrelu"

    def test_batchnorm_counts(self):
        layer = BatchNorm()
        layer.build((4, 4, 8), Rng(0))
        assert layer.trainable_count == 16
        assert layer.non_trainable_count == 16

    def test_trimmed_pool_forward(self):
        out = MaxPool2D(2, trim=True).forward(Tensor(np.zeros((1, 5, 5, 2))), training=False)
        assert out.shape == (1, 2, 2, 2)

    def test_residual_block(self, rng):
        block = ResidualBlock(6, 3)
        assert block.build((4, 4, 3), Rng(0)) == (4, 4, 6)
        assert "projection.kernel" in block.parameters()
        assert set(block.buffers()) == {
            "bn_a.running_mean",
            "bn_a.running_var",
            "bn_b.running_mean",
            "bn_b.running_var",
        }
        out = block.forward(Tensor(rng.normal((2, 4, 4, 3))), training=True)
        assert out.shape == (2, 4, 4, 6)
        assert np.all(out.data >= 0)

    def test_unknown_activation(self):
        with pytest.raises(ShapeError):
            Activation("gelu")
