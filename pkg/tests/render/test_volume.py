"""
Tests for camera rays, stratified sampling and alpha compositing.
"""

import numpy as np
import pytest

from src.lumenfield.autodiff import Tensor
from src.lumenfield.field import FieldConfig, PointOutput, init_field_params
from src.lumenfield.render import (
    Ray,
    RayBatch,
    RaySample,
    camera_rays,
    composite,
    enhance,
    quadrature_weights,
    render_rays,
    sample_stratified,
)
from src.lumenfield.synthscene import intrinsics_for, look_at


def _points(sigma, c_l, s=None):
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    c_l = np.asarray(c_l, dtype=np.float64).reshape(-1, 3)
    s = np.ones_like(c_l) if s is None else np.asarray(s, dtype=np.float64).reshape(-1, 3)
    return PointOutput(sigma=Tensor(sigma), h=Tensor(np.zeros((sigma.size, 1))), c_l=Tensor(c_l), s=Tensor(s))


def _sample(deltas):
    deltas = np.asarray(deltas, dtype=np.float64)
    t_values = np.cumsum(deltas, axis=-1)
    points = np.zeros(deltas.shape + (3,))
    return RaySample(t_values=t_values, deltas=deltas, points=points, directions=points.copy())


class TestSampling:
    """Stratified samples along rays."""

    def test_midpoints(self):
        ray = Ray(o=(0.0, 0.0, 0.0), d=(0.0, 0.0, -1.0), t_n=0.0, t_f=1.0)
        sample = sample_stratified(ray, 4, jitter=False)
        np.testing.assert_allclose(sample.t_values[0], [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(sample.deltas[0], [0.25, 0.25, 0.25, 0.125])

    def test_jitter_is_reproducible(self):
        ray = Ray(o=(0.0, 0.0, 0.0), d=(1.0, 0.0, 0.0), t_n=2.0, t_f=6.0)
        a = sample_stratified(ray, 16, jitter=True, rng=np.random.default_rng(5))
        b = sample_stratified(ray, 16, jitter=True, rng=np.random.default_rng(5))
        np.testing.assert_array_equal(a.t_values, b.t_values)

    def test_increasing_and_bounded(self):
        ray = Ray(o=(0.0, 0.0, 0.0), d=(0.0, 1.0, 0.0), t_n=2.0, t_f=6.0)
        t = sample_stratified(ray, 64, jitter=True, rng=np.random.default_rng(0)).t_values[0]
        assert np.all(np.diff(t) > 0.0)
        assert t[0] >= 2.0 and t[-1] <= 6.0

    def test_jitter_needs_rng(self):
        ray = Ray(o=(0.0, 0.0, 0.0), d=(0.0, 1.0, 0.0), t_n=0.0, t_f=1.0)
        with pytest.raises(ValueError):
            sample_stratified(ray, 4, jitter=True)

    def test_ray_validation(self):
        with pytest.raises(ValueError):
            Ray(o=(0.0, 0.0, 0.0), d=(0.0, 0.0, -1.0), t_n=1.0, t_f=1.0)
        with pytest.raises(ValueError):
            Ray(o=(0.0, 0.0, 0.0), d=(0.0, 0.0, -2.0), t_n=0.0, t_f=1.0)


class TestCameraRays:

    def test_center_pixel_looks_at_target(self):
        pose = look_at([0.0, 0.0, 4.0])
        fx, fy, cx, cy = intrinsics_for(8, 8)
        rays = camera_rays(pose, (fx, fy, cx, cy), 8, 8, 2.0, 6.0, pixels=np.array([[3, 3], [4, 4]]))
        mean_dir = rays.directions.mean(axis=0)
        mean_dir /= np.linalg.norm(mean_dir)
        np.testing.assert_allclose(mean_dir, [0.0, 0.0, -1.0], atol=1e-12)

    def test_full_image_ordering(self):
        rays = camera_rays(look_at([0.0, 0.0, 4.0]), intrinsics_for(6, 4), 4, 6, 2.0, 6.0, view_id=3)
        assert len(rays) == 24
        np.testing.assert_array_equal(rays.pixel_coords[7], [1, 1])
        assert np.all(rays.view_ids == 3)


class TestComposite:
    """Alpha compositing weights and colors."""

    def test_two_sample_example(self):
        out = composite(
            _points([0.5, 1.0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            _sample([[1.0, 1.0]]),
        )
        w1 = 1.0 - np.exp(-0.5)
        w2 = np.exp(-0.5) * (1.0 - np.exp(-1.0))
        np.testing.assert_allclose(out.weights.data[0], [w1, w2])
        np.testing.assert_allclose(out.color_low.data[0], [w1, w2, 0.0])
        assert out.color_low.data[0, 0] == pytest.approx(0.3935, abs=1e-4)
        assert out.color_low.data[0, 1] == pytest.approx(0.3834, abs=1e-4)

    def test_opaque_point(self):
        out = composite(_points([1e4], [[0.2, 0.4, 0.6]]), _sample([[1.0]]))
        np.testing.assert_allclose(out.weights.data, [[1.0]])
        np.testing.assert_allclose(out.color_low.data[0], [0.2, 0.4, 0.6])

    def test_empty_space(self):
        out = composite(_points(np.zeros(8), np.full((8, 3), 0.7)), _sample(np.full((2, 4), 0.5)))
        np.testing.assert_array_equal(out.weights.data, 0.0)
        np.testing.assert_array_equal(out.color_low.data, 0.0)
        np.testing.assert_array_equal(out.acc.data, 0.0)

    def test_restored_and_response(self):
        s = [[2.0, 1.0, 0.5], [2.0, 1.0, 0.5]]
        out = composite(_points([0.5, 1.0], [[0.1, 0.1, 0.1]] * 2, s), _sample([[1.0, 1.0]]))
        acc = out.acc.data[0]
        np.testing.assert_allclose(out.response.data[0], acc * np.array([2.0, 1.0, 0.5]))
        np.testing.assert_allclose(out.color_restored.data[0], acc * np.array([0.2, 0.1, 0.05]))

    def test_weights_sum_at_most_one(self):
        rng = np.random.default_rng(2)
        sigma = rng.uniform(0.0, 50.0, size=(1000, 32))
        deltas = rng.uniform(0.01, 0.2, size=(1000, 32))
        weights, transmittance = quadrature_weights(sigma, deltas)
        assert np.all(weights.sum(axis=-1) <= 1.0 + 1e-12)
        assert np.all(weights >= 0.0)
        np.testing.assert_array_equal(transmittance[:, 0], 1.0)
        assert np.all(np.diff(transmittance, axis=-1) <= 0.0)

    def test_composited_weights_sum_at_most_one(self):
        rng = np.random.default_rng(3)
        sigma = rng.uniform(0.0, 50.0, size=(1000, 32))
        deltas = rng.uniform(0.01, 0.2, size=(1000, 32))
        colors = rng.uniform(0.0, 1.0, size=(32000, 3))
        out = composite(_points(sigma, colors), _sample(deltas))
        assert np.all(out.weights.data >= 0.0)
        assert np.all(out.acc.data <= 1.0 + 1e-12)
        np.testing.assert_array_equal(out.transmittance.data[:, 0], 1.0)
        assert np.all(np.diff(out.transmittance.data, axis=-1) <= 0.0)

    def test_unit_response_restores_nothing(self):
        rng = np.random.default_rng(6)
        sigma = rng.uniform(0.0, 5.0, size=(50, 8))
        deltas = rng.uniform(0.05, 0.3, size=(50, 8))
        colors = rng.uniform(0.0, 0.2, size=(400, 3))
        out = composite(_points(sigma, colors, np.ones((400, 3))), _sample(deltas))
        np.testing.assert_array_equal(out.color_restored.data, out.color_low.data)
        np.testing.assert_allclose(out.response.data, np.repeat(out.acc.data[:, None], 3, axis=1), rtol=1e-12)

    def test_optical_depth_invariance(self):
        """Doubling density while halving spacing leaves the weights unchanged."""
        rng = np.random.default_rng(9)
        sigma = rng.uniform(0.0, 5.0, size=(3, 10))
        deltas = rng.uniform(0.05, 0.3, size=(3, 10))
        a, _ = quadrature_weights(sigma, deltas)
        b, _ = quadrature_weights(2.0 * sigma, 0.5 * deltas)
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_matches_array_weights(self):
        rng = np.random.default_rng(4)
        sigma = rng.uniform(0.0, 3.0, size=(2, 5))
        deltas = rng.uniform(0.1, 0.5, size=(2, 5))
        out = composite(_points(sigma, np.full((10, 3), 0.5)), _sample(deltas))
        weights, transmittance = quadrature_weights(sigma, deltas)
        np.testing.assert_allclose(out.weights.data, weights, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(out.transmittance.data, transmittance, rtol=1e-12)

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError):
            quadrature_weights(np.array([[-1.0]]), np.array([[1.0]]))


class TestEnhance:

    def test_unit_gain(self):
        c = np.array([[0.1, 0.2, 0.3]])
        np.testing.assert_array_equal(enhance(c, 1.0), c)

    def test_linear_gain(self):
        np.testing.assert_allclose(enhance(np.array([0.1, 0.2, 0.3]), 2.0), [0.2, 0.4, 0.6])

    def test_clamped(self):
        np.testing.assert_allclose(enhance(np.array([0.2, 0.05, 0.01]), 10.0), [1.0, 0.5, 0.1])

    def test_unclamped(self):
        np.testing.assert_allclose(enhance(np.array([0.2]), 10.0, clamp=False), [2.0])

    def test_non_positive_gain(self):
        with pytest.raises(ValueError):
            enhance(np.array([0.1]), 0.0)


class TestRenderRays:

    def setup_method(self):
        cfg = FieldConfig(position_frequencies=2, direction_frequencies=1, trunk_depth=1, trunk_width=8, head_width=8)
        self.params = init_field_params(cfg, seed=0)
        self.rays = camera_rays(look_at([0.0, 0.5, 3.0]), intrinsics_for(4, 4), 4, 4, 1.5, 4.5)

    def test_chunked_matches_whole(self):
        whole = render_rays(self.params, self.rays, 8)
        chunked = render_rays(self.params, self.rays, 8, chunk=5)
        np.testing.assert_allclose(chunked.color_low.data, whole.color_low.data, rtol=1e-12)
        np.testing.assert_allclose(chunked.response.data, whole.response.data, rtol=1e-12)

    def test_enhance_stores_result(self):
        out = render_rays(self.params, self.rays, 8)
        enhanced = enhance(out, 3.0)
        assert out.color_enhanced is enhanced
        assert enhanced.shape == (16, 3)

    def test_ray_batch_from_rays(self):
        rays = [Ray((0.0, 0.0, 0.0), (0.0, 0.0, -1.0), 1.0, 2.0, (0, i)) for i in range(3)]
        batch = RayBatch.from_rays(rays, view_id=2)
        assert len(batch) == 3
        assert batch.n_patches == 0
        np.testing.assert_array_equal(batch.view_ids, [2, 2, 2])
