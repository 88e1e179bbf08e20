import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactflow.nn import Tensor, concat, im2col, sigmoid, silu, softmax

from conftest import check_grads


class TestKnownGradients:
    """Hand-computable cases with exact expected values."""

    def test_weighted_sum(self):
        w = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        x = Tensor(np.array([3.0, 4.0]), requires_grad=True)
        loss = (w * x).sum()
        assert loss.item() == 11.0
        loss.backward()
        np.testing.assert_array_equal(w.grad, [3.0, 4.0])
        np.testing.assert_array_equal(x.grad, [1.0, 2.0])

    def test_sum_of_squares(self):
        x = Tensor(np.array([1.0, -2.0]), requires_grad=True)
        (x * x).sum().backward()
        np.testing.assert_array_equal(x.grad, [2.0, -4.0])

    def test_grad_accumulates_across_uses(self):
        x = Tensor(np.array([2.0]), requires_grad=True)
        (x * x + x).sum().backward()  # d/dx (x^2 + x) = 2x + 1
        np.testing.assert_allclose(x.grad, [5.0])

    def test_backward_requires_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(ValueError):
            (x * 2).backward()

    def test_detach_blocks_gradient(self):
        x = Tensor(np.array([3.0]), requires_grad=True)
        (x.detach() * x).sum().backward()
        np.testing.assert_allclose(x.grad, [3.0])


class TestFiniteDifference:
    def test_add_broadcast(self):
        rng = np.random.default_rng(0)
        check_grads(lambda a, b: (a + b).sum(),
                    [rng.standard_normal((3, 4)), rng.standard_normal(4)])

    def test_mul_broadcast(self):
        rng = np.random.default_rng(1)
        check_grads(lambda a, b: ((a * b) * (a * b)).sum(),
                    [rng.standard_normal((2, 3, 4)), rng.standard_normal((3, 1))])

    def test_div_and_pow(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((3, 3))
        b = rng.uniform(0.5, 2.0, (3, 3))
        check_grads(lambda x, y: ((x / y) ** 2).sum(), [a, b])

    def test_rsub_rdiv(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(0.5, 1.5, (4,))
        check_grads(lambda x: ((1.0 - x) + 2.0 / x).sum(), [a])

    def test_matmul_2d(self):
        rng = np.random.default_rng(4)
        check_grads(lambda a, b: (a @ b).sum(),
                    [rng.standard_normal((3, 5)), rng.standard_normal((5, 2))])

    def test_matmul_batched(self):
        rng = np.random.default_rng(5)
        check_grads(lambda a, b: ((a @ b) ** 2).sum(),
                    [rng.standard_normal((2, 3, 4)), rng.standard_normal((2, 4, 3))])

    def test_matmul_broadcast_stack(self):
        rng = np.random.default_rng(6)
        check_grads(lambda a, b: (a @ b).sum(),
                    [rng.standard_normal((2, 2, 3, 4)), rng.standard_normal((4, 5))])

    def test_reductions_with_axes(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((3, 4, 5))
        check_grads(lambda x: (x.mean(axis=1) ** 2).sum(), [a])
        check_grads(lambda x: (x.sum(axis=(0, 2)) ** 2).sum(), [a])
        check_grads(lambda x: (x.mean(axis=-1, keepdims=True) * x).sum(), [a])

    def test_shape_ops(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((2, 3, 4))
        check_grads(lambda x: (x.reshape(6, 4) ** 2).sum(), [a])
        check_grads(lambda x: (x.swapaxes(0, 2) ** 2).sum(), [a])
        check_grads(lambda x: (x.transpose(2, 0, 1) ** 2).sum(), [a])

    def test_getitem(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((4, 5))
        check_grads(lambda x: (x[1:3, ::2] ** 2).sum(), [a])
        check_grads(lambda x: (x[..., :3] * x[..., 2:]).sum(), [a])

    def test_elementwise_nonlinear(self):
        rng = np.random.default_rng(10)
        a = rng.uniform(0.2, 2.0, (3, 4))
        check_grads(lambda x: (x.exp() + x.log() + x.sqrt()).sum(), [a])
        check_grads(lambda x: (x.sin() * x.cos()).sum(), [a])

    def test_sigmoid_silu(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((5, 3)) * 2
        check_grads(lambda x: (sigmoid(x) ** 2).sum(), [a])
        check_grads(lambda x: (silu(x) ** 2).sum(), [a])

    def test_softmax(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((2, 3, 4))
        t = rng.standard_normal((2, 3, 4))  # fixed projection, non-trivial grad
        check_grads(lambda x: (softmax(x) * Tensor(t)).sum(), [a])

    def test_concat(self):
        rng = np.random.default_rng(13)
        check_grads(lambda a, b, c: (concat([a, b, c], axis=1) ** 2).sum(),
                    [rng.standard_normal((2, 3)), rng.standard_normal((2, 1)),
                     rng.standard_normal((2, 4))])

    def test_im2col(self):
        rng = np.random.default_rng(14)
        a = rng.standard_normal((2, 3, 5, 5))
        check_grads(lambda x: (im2col(x, 3, 2, 1) ** 2).sum(), [a])


class TestSoftmaxProperties:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(20)
        y = softmax(Tensor(rng.standard_normal((4, 7)) * 30)).data
        np.testing.assert_allclose(y.sum(axis=-1), 1.0, atol=1e-6)
        assert np.all(y >= 0)

    def test_shift_invariance(self):
        x = np.array([[1.0, 2.0, 3.0]])
        a = softmax(Tensor(x)).data
        b = softmax(Tensor(x + 100.0)).data
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_no_overflow_at_large_logits(self):
        y = softmax(Tensor(np.array([[1e4, 0.0, -1e4]]))).data
        assert np.all(np.isfinite(y))
        np.testing.assert_allclose(y[0, 0], 1.0)


class TestBroadcastUnbroadcast:
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_grad_shape_matches_input(self, rows, cols, seed):
        rng = np.random.default_rng(seed)
        a = Tensor(rng.standard_normal((rows, cols)), requires_grad=True)
        b = Tensor(rng.standard_normal((cols,)), requires_grad=True)
        ((a + b) * b).sum().backward()
        assert a.grad.shape == (rows, cols)
        assert b.grad.shape == (cols,)

    def test_scalar_leaf(self):
        s = Tensor(np.array(2.0), requires_grad=True)
        x = Tensor(np.arange(6, dtype=np.float64).reshape(2, 3))
        (s * x).sum().backward()
        np.testing.assert_allclose(s.grad, 15.0)


class TestIm2col:
    def test_matches_manual_patches(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 1, 4, 4)
        cols = im2col(Tensor(x), kernel=2, stride=2, padding=0).data
        assert cols.shape == (1, 4, 4)
        np.testing.assert_array_equal(cols[0, 0], [0, 1, 4, 5])
        np.testing.assert_array_equal(cols[0, 3], [10, 11, 14, 15])

    def test_padding_contributes_zeros(self):
        x = np.ones((1, 1, 2, 2))
        cols = im2col(Tensor(x), kernel=3, stride=1, padding=1).data
        # center patch covers the full image, corners only partially
        assert cols[0, 0].sum() == 4.0  # 3x3 window at (-1,-1) sees all four ones
        np.testing.assert_array_equal(cols.shape, (1, 4, 9))
