"""
Tests for the data, chromatic adaptation and smoothness losses, the
exposure gain and the assembled objective.
"""

import numpy as np
import pytest

from src.lumenfield.autodiff import Graph, Tensor, backward, grad_check
from src.lumenfield.errors import ConfigError, ShapeError
from src.lumenfield.objective import (
    LossConfig,
    auto_exposure_gain,
    chromatic_adaptation_loss,
    data_loss,
    gray_world_target,
    objective,
    smoothness_loss,
    to_patches,
    total_loss,
)
from src.lumenfield.rawproc import heteroscedastic_noise
from src.lumenfield.trainer import adam_update


class TestDataLoss:
    """Log tone-mapped reconstruction error."""

    def test_zero_at_target(self):
        c = np.random.default_rng(0).uniform(0.0, 0.2, size=(8, 3))
        assert data_loss(Tensor(c), c).item() == 0.0

    def test_scalar_example(self):
        value = data_loss(Tensor(np.full((4, 3), 0.1)), np.full((4, 3), 0.2), 1e-3).item()
        assert value == pytest.approx((np.log(0.101) - np.log(0.201)) ** 2, rel=1e-12)
        assert value == pytest.approx(0.4742, abs=1e-3)

    def test_dark_errors_weigh_more(self):
        dark = data_loss(Tensor([[0.02, 0.02, 0.02]]), np.full((1, 3), 0.01)).item()
        bright = data_loss(Tensor([[0.51, 0.51, 0.51]]), np.full((1, 3), 0.5)).item()
        assert dark > bright

    def test_scale_invariance_with_scaled_offset(self):
        rng = np.random.default_rng(1)
        c_l = rng.uniform(0.01, 0.2, size=(6, 3))
        c_gt = rng.uniform(0.01, 0.2, size=(6, 3))
        a = data_loss(Tensor(c_l), c_gt, 1e-3).item()
        b = data_loss(Tensor(7.0 * c_l), 7.0 * c_gt, 7e-3).item()
        assert a == pytest.approx(b, rel=1e-10)

    def test_constant_fit_averages_noise(self):
        """A constant fitted to noisy views of one pixel lands on their mean tone-mapped value."""
        eps, clean, views = 1e-3, 0.5, 200
        observed = np.maximum(heteroscedastic_noise(np.full((views, 1), clean), 0.05, 0.01, rng=0), 0.0)
        psi = np.log(observed + eps)
        c = np.array([[0.1]])
        m = v = np.zeros_like(c)
        steps = 3000
        for step in range(1, steps + 1):
            param = Tensor(c, requires_grad=True)
            with Graph():
                backward(data_loss(param * Tensor(np.ones((views, 1))), observed, eps))
            lr = 1e-2 * 1e-3 ** (step / steps)
            c, m, v = adam_update(c, param.grad, m, v, lr, 0.9, 0.999, 1e-8, step)
        fitted = np.log(c[0, 0] + eps)
        assert fitted == pytest.approx(psi.mean(), abs=5e-4)
        standard_error = psi.std(ddof=1) / np.sqrt(views)
        assert abs(fitted - np.log(clean + eps)) < 3.0 * standard_error

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            data_loss(Tensor(np.ones((2, 3))), np.ones((3, 3)))


class TestChromaticAdaptation:
    """Gray-world pull on the integrated response."""

    def test_gray_world_gains(self):
        np.testing.assert_allclose(gray_world_target([[0.1, 0.2, 0.3]]), [2.0, 1.0, 2.0 / 3.0])

    def test_hand_example(self):
        loss = chromatic_adaptation_loss(Tensor([[1.0, 1.0, 1.0]]), np.array([[0.1, 0.2, 0.3]]))
        assert loss.item() == pytest.approx((1.0 + 0.0 + 1.0 / 9.0) / 3.0)
        assert loss.item() == pytest.approx(0.3704, abs=1e-4)

    def test_target_met(self):
        c = np.array([[0.1, 0.2, 0.3], [0.3, 0.2, 0.1], [0.2, 0.4, 0.2]])
        s = np.tile(gray_world_target(c), (3, 1))
        assert chromatic_adaptation_loss(Tensor(s), c).item() == pytest.approx(0.0, abs=1e-24)

    def test_gray_batch_with_unit_response(self):
        c = np.full((5, 3), 0.3)
        assert chromatic_adaptation_loss(Tensor(np.ones((5, 3))), c).item() == pytest.approx(0.0, abs=1e-24)

    def test_gradient_closed_form(self):
        rng = np.random.default_rng(2)
        c = rng.uniform(0.05, 0.5, size=(8, 3))
        s = Tensor(rng.uniform(0.5, 2.0, size=(8, 3)), requires_grad=True)
        chromatic_adaptation_loss(s, c).backward()
        expected = 2.0 * (s.data - gray_world_target(c)) / 3.0
        np.testing.assert_allclose(s.grad, expected, rtol=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        c = rng.uniform(0.05, 0.5, size=(8, 3))
        s = Tensor(rng.uniform(0.5, 2.0, size=(8, 3)))
        assert grad_check(lambda t: chromatic_adaptation_loss(t, c), s) < 1e-4

    def test_dark_channel_rejected(self):
        with pytest.raises(ValueError):
            gray_world_target([[0.0, 0.2, 0.3]])


class TestSmoothness:
    """Edge-aware smoothness of the response map."""

    def test_constant_response(self):
        rng = np.random.default_rng(4)
        s = Tensor(np.full((3, 2, 2, 3), 1.7))
        c = rng.uniform(size=(3, 2, 2, 3))
        for pairing in ("cross", "same"):
            assert smoothness_loss(s, c, pairing=pairing).item() == 0.0

    def test_vertical_pair(self):
        s = Tensor(np.array([1.0, 1.2]).reshape(1, 2, 1, 1))
        c = np.full((1, 2, 1, 1), 0.3)
        value = smoothness_loss(s, c, gamma1=1.0, gamma2=1.0, epsilon=1e-4).item()
        assert value == pytest.approx(400.0, rel=1e-9)

    def test_color_edges_relax_the_penalty(self):
        s = Tensor(np.array([1.0, 1.2, 1.0, 1.2]).reshape(1, 2, 2, 1))
        flat = np.zeros((1, 2, 2, 1))
        edged = np.array([0.0, 0.5, 0.0, 0.5]).reshape(1, 2, 2, 1)
        # response and color both change across columns
        assert smoothness_loss(s, edged, pairing="same").item() < smoothness_loss(s, flat, pairing="same").item()

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        c = rng.uniform(size=(2, 2, 2, 3))
        s = Tensor(rng.uniform(0.5, 2.0, size=(2, 2, 2, 3)))
        for pairing in ("cross", "same"):
            f = lambda t, p=pairing: smoothness_loss(t, c, epsilon=0.1, pairing=p)
            assert grad_check(f, s) < 1e-4

    def test_single_pixel_patch_rejected(self):
        with pytest.raises(ValueError):
            smoothness_loss(Tensor(np.ones((1, 1, 1, 3))), np.ones((1, 1, 1, 3)))

    def test_to_patches(self):
        values = np.arange(24.0).reshape(8, 3)
        patches = to_patches(values, 2)
        assert patches.shape == (2, 2, 2, 3)
        np.testing.assert_array_equal(patches[1, 0, 1], values[5])


class TestExposureAndTotal:

    def test_gain_at_target(self):
        assert auto_exposure_gain(np.full((4, 4, 3), 0.4)) == pytest.approx(1.0)

    def test_gain_ratio(self):
        assert auto_exposure_gain(np.full((4, 4, 3), 0.04), target_mean=0.4) == pytest.approx(10.0)

    def test_gain_clamped(self):
        assert auto_exposure_gain(np.full((2, 3), 0.0004), target_mean=0.4, alpha_max=100.0) == 100.0

    def test_gain_never_darkens(self):
        assert auto_exposure_gain(np.full((2, 3), 0.9)) == 1.0

    def test_black_image_rejected(self):
        with pytest.raises(ValueError):
            auto_exposure_gain(np.zeros((2, 3)))

    def test_weighted_total(self):
        cfg = LossConfig(lambda1=1.0, lambda2=0.1, lambda3=0.1)
        assert total_loss((0.5, 0.2, 0.1), cfg).total == pytest.approx(0.53)

    def test_ablated_total_is_data(self):
        cfg = LossConfig(lambda2=0.0, lambda3=0.0)
        assert total_loss((0.5, 0.2, 0.1), cfg).total == pytest.approx(0.5)

    def test_zero_parts(self):
        assert total_loss((0.0, 0.0, 0.0), LossConfig()).total == 0.0

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            LossConfig(smooth_pairing="diagonal")
        with pytest.raises(ConfigError):
            LossConfig.from_dict({"lambda4": 1.0})


class TestObjective:
    """The assembled training loss."""

    def setup_method(self):
        rng = np.random.default_rng(6)
        self.color = rng.uniform(0.01, 0.1, size=(8, 3))
        self.response = rng.uniform(0.5, 2.0, size=(8, 3))
        self.target = rng.uniform(0.01, 0.1, size=(8, 3))

    def test_breakdown_matches_terms(self):
        cfg = LossConfig()
        loss, parts = objective(Tensor(self.color), Tensor(self.response), self.target, cfg, 2)
        assert parts.data == pytest.approx(data_loss(Tensor(self.color), self.target).item())
        assert parts.ca == pytest.approx(chromatic_adaptation_loss(Tensor(self.response), self.color).item())
        assert loss.item() == pytest.approx(parts.total)

    def test_ablation_skips_terms(self):
        cfg = LossConfig(lambda2=0.0, lambda3=0.0)
        loss, parts = objective(Tensor(self.color), Tensor(self.response), self.target, cfg, 2)
        assert parts.ca == 0.0 and parts.smooth == 0.0
        assert loss.item() == pytest.approx(parts.data)

    def test_patch_order_does_not_matter(self):
        """Moving whole patches together leaves every term unchanged."""
        cfg = LossConfig()
        order = np.array([4, 5, 6, 7, 0, 1, 2, 3])
        _, parts = objective(Tensor(self.color), Tensor(self.response), self.target, cfg, 2)
        _, permuted = objective(
            Tensor(self.color[order]), Tensor(self.response[order]), self.target[order], cfg, 2
        )
        assert permuted.data == pytest.approx(parts.data, rel=1e-12)
        assert permuted.ca == pytest.approx(parts.ca, rel=1e-12)
        assert permuted.smooth == pytest.approx(parts.smooth, rel=1e-12)
        assert permuted.total == pytest.approx(parts.total, rel=1e-12)
