import numpy as np
import pytest

from auxcell import LabelRangeError, ShapeError
from auxcell.nn import functional as F

from .gradient_check import assert_close, numeric_grad


class TestConvolutions:
    def setup_class(self):
        self.rng = np.random.default_rng(0)
        self.x = self.rng.normal(size=(2, 3, 5, 6))
        self.r = self.rng.normal(size=(2, 4, 5, 6))

    @pytest.mark.parametrize("kernel,dilation", [(1, 1), (3, 1), (3, 2), (5, 1)])
    def test_conv2d_gradients(self, kernel, dilation):
        x = self.x.copy()
        w = self.rng.normal(size=(4, 3, kernel, kernel))
        f = lambda: float(np.sum(F.conv2d(x, w, dilation) * self.r))
        dx, dw = F.conv2d_backward(self.r, x, w, dilation)
        assert_close(dx, numeric_grad(f, x))
        assert_close(dw, numeric_grad(f, w))

    def test_conv2d_keeps_size(self):
        w = self.rng.normal(size=(4, 3, 3, 3))
        assert F.conv2d(self.x, w, 12).shape == (2, 4, 5, 6)

    def test_conv2d_channel_mismatch(self):
        with pytest.raises(ShapeError):
            F.conv2d(self.x, np.zeros((4, 2, 1, 1)))

    def test_conv1x1_is_a_channel_matmul(self):
        w = self.rng.normal(size=(4, 3, 1, 1))
        expected = np.einsum("nchw,oc->nohw", self.x, w[:, :, 0, 0])
        np.testing.assert_allclose(F.conv2d(self.x, w), expected)

    @pytest.mark.parametrize("kernel,dilation", [(3, 1), (3, 3), (5, 6)])
    def test_depthwise_gradients(self, kernel, dilation):
        x = self.x.copy()
        w = self.rng.normal(size=(3, 1, kernel, kernel))
        r = self.rng.normal(size=x.shape)
        f = lambda: float(np.sum(F.depthwise_conv2d(x, w, dilation) * r))
        dx, dw = F.depthwise_conv2d_backward(r, x, w, dilation)
        assert_close(dx, numeric_grad(f, x))
        assert_close(dw, numeric_grad(f, w))


class TestBatchNorm:
    def setup_class(self):
        self.rng = np.random.default_rng(1)

    def test_train_gradients(self):
        x = self.rng.normal(size=(3, 2, 4, 4))
        gamma, beta = self.rng.normal(size=2), self.rng.normal(size=2)
        r = self.rng.normal(size=x.shape)
        f = lambda: float(np.sum(F.batch_norm_train(x, gamma, beta, 1e-5)[0] * r))
        _, cache, _, _ = F.batch_norm_train(x, gamma, beta, 1e-5)
        dx, dgamma, dbeta = F.batch_norm_backward(r, cache)
        assert_close(dx, numeric_grad(f, x))
        assert_close(dgamma, numeric_grad(f, gamma))
        assert_close(dbeta, numeric_grad(f, beta))

    def test_eval_gradients(self):
        x = self.rng.normal(size=(2, 2, 3, 3))
        gamma, beta = self.rng.normal(size=2), self.rng.normal(size=2)
        mean, var = self.rng.normal(size=2), self.rng.uniform(0.5, 2.0, size=2)
        r = self.rng.normal(size=x.shape)
        f = lambda: float(np.sum(F.batch_norm_eval(x, gamma, beta, mean, var, 1e-5)[0] * r))
        _, cache = F.batch_norm_eval(x, gamma, beta, mean, var, 1e-5)
        dx, dgamma, _ = F.batch_norm_backward(r, cache)
        assert_close(dx, numeric_grad(f, x))
        assert_close(dgamma, numeric_grad(f, gamma))

    def test_train_normalises(self):
        x = self.rng.normal(3.0, 2.0, size=(4, 3, 5, 5))
        y, _, mean, var = F.batch_norm_train(x, np.ones(3), np.zeros(3), 1e-5)
        np.testing.assert_allclose(y.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)
        np.testing.assert_allclose(y.std(axis=(0, 2, 3)), 1.0, atol=1e-4)
        np.testing.assert_allclose(mean, x.mean(axis=(0, 2, 3)))
        np.testing.assert_allclose(var, x.var(axis=(0, 2, 3), ddof=1))


class TestResampling:
    def setup_class(self):
        self.rng = np.random.default_rng(2)

    def test_upsample_gradients(self):
        x = self.rng.normal(size=(2, 3, 3, 4))
        r = self.rng.normal(size=(2, 3, 12, 16))
        f = lambda: float(np.sum(F.bilinear_upsample(x, 12, 16) * r))
        assert_close(F.bilinear_upsample_backward(r, 3, 4), numeric_grad(f, x))

    def test_upsample_same_size_is_identity(self):
        x = self.rng.normal(size=(1, 2, 4, 4))
        assert F.bilinear_upsample(x, 4, 4) is x

    def test_upsample_preserves_constants(self):
        x = np.full((1, 1, 3, 3), 2.5)
        np.testing.assert_allclose(F.bilinear_upsample(x, 24, 24), 2.5)

    def test_interpolation_rows_sum_to_one(self):
        for in_size, out_size in ((1, 8), (3, 24), (6, 48), (4, 4)):
            np.testing.assert_allclose(F.interpolation_matrix(in_size, out_size).sum(axis=1), 1.0)

    def test_pooling_gradients(self):
        x = self.rng.normal(size=(2, 3, 4, 6))
        r = self.rng.normal(size=(2, 3, 2, 3))
        f = lambda: float(np.sum(F.avg_pool2(x) * r))
        assert_close(F.avg_pool2_backward(r), numeric_grad(f, x))

        r1 = self.rng.normal(size=(2, 3, 1, 1))
        g = lambda: float(np.sum(F.global_avg_pool(x) * r1))
        assert_close(F.global_avg_pool_backward(r1, 4, 6), numeric_grad(g, x))

    def test_avg_pool_needs_even_sizes(self):
        with pytest.raises(ShapeError):
            F.avg_pool2(np.zeros((1, 1, 3, 4)))


class TestLosses:
    def setup_class(self):
        self.rng = np.random.default_rng(3)

    def test_cross_entropy_of_uniform_logits(self):
        value, _ = F.cross_entropy(np.zeros((1, 2, 1, 1)), np.zeros((1, 1, 1), dtype=np.int64))
        assert value == pytest.approx(np.log(2.0))

    def test_cross_entropy_gradients(self):
        logits = self.rng.normal(size=(2, 4, 3, 3))
        target = self.rng.integers(0, 4, size=(2, 3, 3))
        target[0, 0, 0] = 255
        f = lambda: F.cross_entropy(logits, target)[0]
        assert_close(F.cross_entropy(logits, target)[1], numeric_grad(f, logits))

    def test_ignored_pixels_have_no_gradient(self):
        logits = self.rng.normal(size=(1, 3, 2, 2))
        target = np.array([[[0, 255], [255, 2]]])
        _, d = F.cross_entropy(logits, target)
        assert np.all(d[0, :, 0, 1] == 0) and np.all(d[0, :, 1, 0] == 0)

    def test_everything_ignored(self):
        value, d = F.cross_entropy(self.rng.normal(size=(1, 3, 2, 2)), np.full((1, 2, 2), 255))
        assert value == 0.0
        assert not np.any(d)

    def test_label_out_of_range(self):
        with pytest.raises(LabelRangeError):
            F.cross_entropy(np.zeros((1, 3, 1, 1)), np.full((1, 1, 1), 3))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            F.cross_entropy(np.zeros((1, 3, 2, 2)), np.zeros((1, 4, 4), dtype=np.int64))
        with pytest.raises(ShapeError):
            F.mse(np.zeros((1, 3, 2, 2)), np.zeros((1, 3, 4, 4)))

    def test_mse_gradients(self):
        student = self.rng.normal(size=(2, 3, 4, 4))
        teacher = self.rng.normal(size=(2, 3, 4, 4))
        f = lambda: F.mse(student, teacher)[0]
        assert_close(F.mse(student, teacher)[1], numeric_grad(f, student))
