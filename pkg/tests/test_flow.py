import numpy as np
import pytest

from contactflow.flow import (
    FlowBatch,
    SamplerConfig,
    flow_target,
    fm_loss,
    interpolate,
    make_flow_batch,
    sample_ode,
)
from contactflow.nn import Tensor


class TestPath:
    def test_endpoints(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((4, 3, 2))
        noise = rng.standard_normal((4, 3, 2))
        np.testing.assert_array_equal(interpolate(data, noise, np.zeros(4)), data)
        np.testing.assert_array_equal(interpolate(data, noise, np.ones(4)), noise)

    def test_midpoint_is_average(self):
        data = np.array([[0.0, 2.0]])
        noise = np.array([[4.0, -2.0]])
        np.testing.assert_array_equal(
            interpolate(data, noise, np.array([0.5])), [[2.0, 0.0]]
        )

    def test_target_is_path_derivative(self):
        rng = np.random.default_rng(1)
        data, noise = rng.standard_normal((2, 5)), rng.standard_normal((2, 5))
        k, h = np.full(2, 0.3), 1e-6
        fd = (interpolate(data, noise, k + h) - interpolate(data, noise, k - h)) / (2 * h)
        np.testing.assert_allclose(fd, flow_target(data, noise), atol=1e-9)

    def test_per_sample_k(self):
        data = np.zeros((2, 2))
        noise = np.ones((2, 2))
        out = interpolate(data, noise, np.array([0.25, 0.75]))
        np.testing.assert_array_equal(out, [[0.25, 0.25], [0.75, 0.75]])


class TestBatch:
    def test_consistency_and_determinism(self):
        data = np.random.default_rng(2).standard_normal((8, 4)).astype(np.float32)
        b1 = make_flow_batch(data, np.random.default_rng(7))
        b2 = make_flow_batch(data, np.random.default_rng(7))
        np.testing.assert_array_equal(b1.noisy, b2.noisy)
        np.testing.assert_array_equal(b1.k, b2.k)
        np.testing.assert_array_equal(b1.target, b2.target)
        # recover data from (noisy, k, target): data = noisy - k*target
        rec = b1.noisy - b1.k[:, None] * b1.target
        np.testing.assert_allclose(rec, data, atol=1e-6)
        assert b1.noisy.dtype == np.float32

    def test_k_in_unit_interval(self):
        data = np.zeros((512, 2))
        b = make_flow_batch(data, np.random.default_rng(3))
        assert b.k.min() >= 0.0 and b.k.max() <= 1.0
        assert b.k.std() > 0.2  # actually spread out, not collapsed


class TestLoss:
    def test_zero_at_exact_prediction(self):
        t = np.random.default_rng(4).standard_normal((3, 5))
        assert fm_loss(Tensor(t.copy()), t).item() == 0.0

    def test_mean_over_all_elements(self):
        pred = Tensor(np.ones((2, 3)))
        target = np.zeros((2, 3))
        assert fm_loss(pred, target).item() == pytest.approx(1.0)
        pred2 = Tensor(np.array([[2.0, 0.0], [0.0, 0.0]]))
        assert fm_loss(pred2, np.zeros((2, 2))).item() == pytest.approx(1.0)

    def test_gradient_is_scaled_residual(self):
        t = np.zeros((2, 2))
        x = Tensor(np.array([[1.0, -1.0], [2.0, 0.0]]), requires_grad=True)
        fm_loss(x, t).backward()
        np.testing.assert_allclose(x.grad, 2 * x.data / 4)

    def test_non_finite_names_batch_index(self):
        bad = np.ones((4, 3))
        bad[2, 1] = np.nan
        with pytest.raises(FloatingPointError, match="batch index 2"):
            fm_loss(Tensor(bad), np.zeros((4, 3)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fm_loss(Tensor(np.zeros((2, 3))), np.zeros((3, 2)))


class TestSampler:
    def test_constant_field_lands_exactly(self):
        rng = np.random.default_rng(5)
        noise = rng.standard_normal((6, 3))
        c = rng.standard_normal((6, 3))
        for steps in (1, 4, 10, 37):
            out = sample_ode(lambda a, k: c, noise, SamplerConfig(steps))
            np.testing.assert_array_equal(out, noise - c)

    def test_time_dependent_field_hand_euler(self):
        # v(a,k) = k, 4 steps: eval points 1.0, .75, .5, .25, each weighted 1/4
        out = sample_ode(lambda a, k: np.full_like(a, k), np.zeros((1, 1)),
                         SamplerConfig(steps=4))
        assert out[0, 0] == -0.625

    def test_point_mass_field_collapses_exactly(self):
        # optimal field for a point-mass at x*: v = (a - x*) / k, linear along
        # each path, so Euler is exact for any step count
        star = np.array([0.7, -1.3])
        rng = np.random.default_rng(6)
        noise = rng.standard_normal((50, 2))
        for steps in (1, 3, 10):
            out = sample_ode(lambda a, k: (a - star) / k, noise, SamplerConfig(steps))
            np.testing.assert_allclose(out, np.broadcast_to(star, out.shape), atol=1e-12)

    def test_reconstruction_of_training_pair(self):
        rng = np.random.default_rng(7)
        data = rng.standard_normal((4, 3))
        noise = rng.standard_normal((4, 3))
        u = flow_target(data, noise)
        out = sample_ode(lambda a, k: u, noise, SamplerConfig(8))
        np.testing.assert_allclose(out, data, atol=1e-12)

    def test_deterministic_across_calls(self):
        rng = np.random.default_rng(8)
        w = rng.standard_normal((3, 3))
        noise = rng.standard_normal((5, 3))
        f = lambda a, k: np.tanh(a @ w) * (1 + k)
        a = sample_ode(f, noise, SamplerConfig(10))
        b = sample_ode(f, noise.copy(), SamplerConfig(10))
        np.testing.assert_array_equal(a, b)

    def test_input_not_mutated(self):
        noise = np.ones((2, 2))
        keep = noise.copy()
        sample_ode(lambda a, k: a, noise, SamplerConfig(3))
        np.testing.assert_array_equal(noise, keep)

    def test_non_finite_velocity_aborts_with_step(self):
        def f(a, k):
            return np.full_like(a, np.inf) if k < 0.6 else np.zeros_like(a)
        # eval points 1.0, 0.8, 0.6, 0.4, 0.2: first k below 0.6 is step 3
        with pytest.raises(FloatingPointError, match="step 3"):
            sample_ode(f, np.zeros((1, 2)), SamplerConfig(5))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SamplerConfig(steps=0)
