"""
Tests for ground-truth rendering, degradation and dataset files.
"""

import numpy as np
import pytest

from src.lumenfield.errors import ConfigError, DatasetError
from src.lumenfield.rawproc import demosaic_bilinear, mosaic
from src.lumenfield.synthscene import (
    DatasetManifest,
    Degradation,
    Primitive,
    SynthesizeConfig,
    ViewRecord,
    build_scene,
    degrade,
    look_at,
    read_dataset,
    render_ground_truth,
    rescale_dataset,
    synthesize_dataset,
)

SMALL = dict(views=4, width=8, height=8, resolution=12, gt_samples=128, test_every=2)


def _sphere_scene():
    return [Primitive("sphere", (0.0, 0.0, 0.0), 0.6, (0.8, 0.4, 0.2), 20.0)]


def _manifest(pose, size=8, focal=None):
    f = focal if focal is not None else float(size)
    view = ViewRecord(
        pose=[float(v) for v in np.asarray(pose).reshape(-1)],
        fx=f,
        fy=f,
        cx=size / 2,
        cy=size / 2,
        raw_path="raw/view_000.lfrw",
        gt_path="gt/view_000.npy",
    )
    return DatasetManifest(
        width=size, height=size, near=2.0, far=6.0, degradation=Degradation(), views=[view]
    )


class TestDegradation:

    def test_oracle_response(self):
        d = Degradation(dim_factor=0.05, tint=(0.5, 1.0, 2.0))
        np.testing.assert_allclose(d.oracle_response, [40.0, 20.0, 10.0])

    def test_rejects_bad_tint(self):
        with pytest.raises(ConfigError):
            Degradation(tint=(0.7, 0.0, 1.3))

    def test_identity_degradation(self):
        clean = np.random.default_rng(0).uniform(size=(4, 6, 3))
        raw = degrade(clean, Degradation(dim_factor=1.0, tint=(1.0, 1.0, 1.0), beta=0.0, delta=0.0))
        np.testing.assert_array_equal(raw.mosaic, mosaic(clean).mosaic)

    def test_dimming_is_linear(self):
        clean = np.random.default_rng(1).uniform(size=(4, 4, 3))
        full = degrade(clean, Degradation(dim_factor=1.0, tint=(1.0, 1.0, 1.0), beta=0.0, delta=0.0))
        dim = degrade(clean, Degradation(dim_factor=0.05, tint=(1.0, 1.0, 1.0), beta=0.0, delta=0.0))
        np.testing.assert_allclose(dim.mosaic, 0.05 * full.mosaic, rtol=1e-15)

    def test_tint_sets_channel_ratios(self):
        raw = degrade(np.full((16, 16, 3), 0.5), Degradation(dim_factor=1.0, tint=(0.8, 1.0, 1.2), beta=0.0, delta=0.0))
        means = demosaic_bilinear(raw).pixels.reshape(-1, 3).mean(axis=0)
        np.testing.assert_allclose(means / means[1], [0.8, 1.0, 1.2], rtol=0.02)

    def test_clean_range_checked(self):
        with pytest.raises(ValueError):
            degrade(np.full((2, 2, 3), 1.5), Degradation())

    def test_noise_recorded(self):
        raw = degrade(np.full((4, 4, 3), 0.5), Degradation(beta=0.05, delta=0.01), np.random.default_rng(0))
        assert (raw.beta, raw.delta) == (0.05, 0.01)


class TestGroundTruth:
    """Oracle renders with dense midpoint sampling."""

    def test_empty_scene_is_black(self):
        images = render_ground_truth(build_scene([], resolution=8), _manifest(look_at([0.0, 0.0, 4.0])))
        np.testing.assert_array_equal(images[0].pixels, 0.0)

    def test_opaque_wall(self):
        wall = Primitive("box", (0.0, 0.0, 0.0), (0.9, 0.9, 0.3), (0.6, 0.6, 0.6), 1000.0)
        scene = build_scene([wall], resolution=16)
        # a narrow field of view keeps every ray on the wall
        manifest = _manifest(look_at([0.0, 0.0, 4.0]), size=8, focal=40.0)
        image = render_ground_truth(scene, manifest)[0].pixels
        np.testing.assert_allclose(image[1:-1, 1:-1], 0.6, atol=1e-6)

    def test_rerender_is_identical(self):
        scene = build_scene(_sphere_scene(), resolution=12)
        manifest = _manifest(look_at([0.0, 1.0, 4.0]))
        a = render_ground_truth(scene, manifest)[0].pixels
        b = render_ground_truth(scene, manifest)[0].pixels
        np.testing.assert_array_equal(a, b)

    def test_quadrature_converges(self):
        scene = build_scene(_sphere_scene(), resolution=12)
        manifest = _manifest(look_at([0.0, 1.0, 4.0]))
        coarse = render_ground_truth(scene, manifest, n_samples=512)[0].pixels
        fine = render_ground_truth(scene, manifest, n_samples=1024)[0].pixels
        assert np.max(np.abs(coarse - fine)) < 1e-3

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            render_ground_truth(build_scene([], resolution=8), _manifest(look_at([0.0, 0.0, 4.0])), n_samples=64)


class TestDatasetFiles:
    """Writing, reading and rescaling dataset directories."""

    def setup_method(self):
        self.cfg = SynthesizeConfig(**SMALL)

    def test_file_count(self, tmp_path):
        synthesize_dataset(self.cfg, tmp_path)
        files = [p for p in tmp_path.rglob("*") if p.is_file()]
        assert len(files) == 2 * self.cfg.views + 1

    def test_manifest_round_trip(self, tmp_path):
        manifest = synthesize_dataset(self.cfg, tmp_path)
        loaded = DatasetManifest.read(tmp_path)
        assert loaded.to_dict() == manifest.to_dict()
        assert loaded.test_indices == [1, 3]
        assert loaded.train_indices == [0, 2]

    def test_seeded_raws_repeat(self, tmp_path):
        synthesize_dataset(self.cfg, tmp_path / "a")
        synthesize_dataset(self.cfg, tmp_path / "b")
        for i in range(self.cfg.views):
            name = f"raw/view_{i:03d}.lfrw"
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_observed_matches_size(self, tmp_path):
        synthesize_dataset(self.cfg, tmp_path)
        dataset = read_dataset(tmp_path)
        observed = dataset.observed(0)
        assert observed.shape == (8, 8, 3)
        assert np.all(observed >= 0.0)
        assert dataset.ground_truth(0).shape == (8, 8, 3)

    def test_rescale_doubles_exposure(self, tmp_path):
        synthesize_dataset(self.cfg, tmp_path / "src")
        manifest = rescale_dataset(tmp_path / "src", tmp_path / "dst", 2.0)
        assert manifest.exposure_ratio == 2.0
        src = read_dataset(tmp_path / "src").observed(0)
        dst = read_dataset(tmp_path / "dst").observed(0)
        unsaturated = src < 0.4
        np.testing.assert_allclose(dst[unsaturated], 2.0 * src[unsaturated], rtol=1e-9, atol=1e-12)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DatasetError):
            read_dataset(tmp_path / "nothing")

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SynthesizeConfig(width=7)
        with pytest.raises(ConfigError):
            SynthesizeConfig(radius=1.0)
