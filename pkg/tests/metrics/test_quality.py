"""
Tests for PSNR, SSIM, channel ratios and response recovery.
"""

import json
import math

import numpy as np
import pytest

from src.lumenfield.errors import ShapeError
from src.lumenfield.metrics import (
    MetricReport,
    channel_ratios,
    evaluate_renders,
    psnr,
    response_recovery_score,
    ssim,
)


def _reference_ssim(a, b, window=8, peak=255.0):
    """Window-by-window SSIM written out as loops."""
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    values = []
    for y in range(a.shape[0] - window + 1):
        for x in range(a.shape[1] - window + 1):
            pa = a[y:y + window, x:x + window].astype(float).ravel()
            pb = b[y:y + window, x:x + window].astype(float).ravel()
            mu_a, mu_b = pa.mean(), pb.mean()
            var_a = ((pa - mu_a) ** 2).mean()
            var_b = ((pb - mu_b) ** 2).mean()
            cov = ((pa - mu_a) * (pb - mu_b)).mean()
            values.append(
                (2 * mu_a * mu_b + c1) * (2 * cov + c2)
                / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(values))


class TestPsnr:

    def test_twenty_db(self):
        a = np.zeros((4, 4, 3))
        b = np.full((4, 4, 3), 25.5)
        assert psnr(a, b) == pytest.approx(20.0)

    def test_identical_is_infinite(self):
        image = np.random.default_rng(0).integers(0, 256, size=(8, 8, 3))
        assert psnr(image, image) == math.inf

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rng.integers(0, 256, size=(6, 6, 3))
        b = rng.integers(0, 256, size=(6, 6, 3))
        assert psnr(a, b) == psnr(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


class TestSsim:
    """Uniform 8x8 windows with population statistics."""

    def test_identical_is_one(self):
        image = np.random.default_rng(2).integers(0, 256, size=(12, 10, 3))
        assert ssim(image, image) == pytest.approx(1.0)

    def test_inverted_is_not_positive(self):
        image = np.random.default_rng(3).integers(0, 256, size=(16, 16)).astype(float)
        assert ssim(image, 255.0 - image) <= 0.0

    def test_matches_loop_reference(self):
        rng = np.random.default_rng(4)
        a = rng.integers(0, 256, size=(11, 13)).astype(float)
        b = np.clip(a + rng.normal(0.0, 20.0, size=a.shape), 0, 255)
        assert ssim(a, b) == pytest.approx(_reference_ssim(a, b), rel=1e-10)

    def test_color_is_channel_mean(self):
        rng = np.random.default_rng(5)
        a = rng.integers(0, 256, size=(9, 9, 3)).astype(float)
        b = rng.integers(0, 256, size=(9, 9, 3)).astype(float)
        assert ssim(a, b) == pytest.approx(ssim(a.mean(axis=-1), b.mean(axis=-1)))

    def test_too_small(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((7, 16)), np.zeros((7, 16)))


class TestResponseRecovery:

    def test_channel_ratios(self):
        render = np.tile([0.2, 0.4, 0.0], (2, 2, 1))
        reference = np.tile([0.1, 0.4, 0.0], (2, 2, 1))
        ratios = channel_ratios(render, reference)
        assert ratios[:2] == pytest.approx((2.0, 1.0))
        assert math.isnan(ratios[2])

    def test_global_scale_ignored(self):
        oracle = [28.6, 20.0, 15.4]
        assert response_recovery_score([2.0 * v for v in oracle], oracle) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)

    def test_one_channel_off(self):
        err = response_recovery_score([1.1, 1.0, 1.0], [1.0, 1.0, 1.0])
        assert err[0] == pytest.approx(1.1 ** (2.0 / 3.0) - 1.0)
        assert err[1] == err[2] == pytest.approx(1.0 - 1.1 ** (-1.0 / 3.0))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            response_recovery_score([1.0, 0.0, 1.0], [1.0, 1.0, 1.0])


class TestReport:
    """Aggregation and JSON output."""

    def setup_method(self):
        rng = np.random.default_rng(6)
        self.refs = {i: rng.integers(0, 256, size=(8, 8, 3)).astype(np.uint8) for i in (4, 1)}

    def test_views_in_index_order(self):
        report = evaluate_renders(self.refs, self.refs)
        assert [v.index for v in report.views] == [1, 4]
        assert report.mean_ssim == pytest.approx(1.0)
        assert report.response_error is None

    def test_identical_writes_inf(self, tmp_path):
        report = evaluate_renders(self.refs, self.refs, [2.0, 1.0, 1.0], [2.0, 1.0, 1.0])
        path = report.write_json(tmp_path / "metrics.json")
        data = json.loads(path.read_text())
        assert data["views"][0]["psnr_db"] == "inf"
        assert data["mean"]["psnr_db"] == "inf"
        assert data["response_recovery"]["relative_error"] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)

    def test_missing_reference(self):
        with pytest.raises(KeyError):
            evaluate_renders({1: self.refs[1], 7: self.refs[4]}, self.refs)

    def test_empty_report_is_nan(self):
        report = MetricReport()
        assert math.isnan(report.mean_psnr)
        assert "mean" in report.format_table()
