"""
Tests for voxelized scenes, presets and camera poses.
"""

import json

import numpy as np
import pytest

from src.lumenfield.errors import ConfigError
from src.lumenfield.synthscene import (
    PRESETS,
    Primitive,
    build_scene,
    generate_poses,
    get_preset,
    intrinsics_for,
    is_rigid,
    load_scene_spec,
    look_at,
)


class TestPrimitive:

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            Primitive("cone", (0.0, 0.0, 0.0), 0.5, (0.5, 0.5, 0.5))

    def test_albedo_range(self):
        with pytest.raises(ConfigError):
            Primitive("sphere", (0.0, 0.0, 0.0), 0.5, (1.5, 0.5, 0.5))

    def test_dict_round_trip(self):
        box = Primitive("box", (0.1, 0.2, 0.3), (0.2, 0.3, 0.4), (0.9, 0.1, 0.1), 80.0)
        assert Primitive.from_dict(box.to_dict()) == box

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            Primitive.from_dict({"kind": "sphere", "size": 0.2, "radius": 0.2})


class TestBuildScene:
    """Voxelization at voxel centers."""

    def test_empty(self):
        scene = build_scene([], resolution=8)
        np.testing.assert_array_equal(scene.density_grid, 0.0)
        np.testing.assert_array_equal(scene.albedo_grid, 0.0)

    def test_sphere_occupies_its_radius(self):
        sphere = Primitive("sphere", (0.0, 0.0, 0.0), 0.5, (0.2, 0.4, 0.6), 30.0)
        scene = build_scene([sphere], resolution=16)
        radii = np.linalg.norm(scene.voxel_centers(), axis=-1)
        np.testing.assert_array_equal(scene.density_grid > 0.0, radii <= 0.5)
        np.testing.assert_array_equal(scene.albedo_grid[radii <= 0.5], np.tile([0.2, 0.4, 0.6], (np.sum(radii <= 0.5), 1)))

    def test_disjoint_superposition(self):
        a = Primitive("sphere", (-0.5, 0.0, 0.0), 0.3, (1.0, 0.0, 0.0), 20.0)
        b = Primitive("box", (0.5, 0.0, 0.0), (0.2, 0.2, 0.2), (0.0, 0.0, 1.0), 40.0)
        both = build_scene([a, b], resolution=16)
        only_a = build_scene([a], resolution=16)
        only_b = build_scene([b], resolution=16)
        np.testing.assert_array_equal(both.density_grid, only_a.density_grid + only_b.density_grid)
        np.testing.assert_array_equal(both.albedo_grid, only_a.albedo_grid + only_b.albedo_grid)

    def test_overlap_keeps_max_density(self):
        a = Primitive("sphere", (0.0, 0.0, 0.0), 0.4, (1.0, 0.0, 0.0), 20.0)
        b = Primitive("sphere", (0.0, 0.0, 0.0), 0.2, (0.0, 1.0, 0.0), 10.0)
        scene = build_scene([a, b], resolution=16)
        assert scene.density_grid.max() == 20.0
        inner = np.linalg.norm(scene.voxel_centers(), axis=-1) <= 0.2
        np.testing.assert_array_equal(scene.albedo_grid[inner][:, 1], 1.0)

    def test_primitive_outside_bounds(self):
        with pytest.raises(ConfigError):
            build_scene([Primitive("sphere", (0.9, 0.0, 0.0), 0.5, (0.5, 0.5, 0.5))])

    def test_query_is_zero_outside(self):
        scene = build_scene(get_preset("spheres"), resolution=16)
        sigma, albedo = scene.query(np.array([[3.0, 0.0, 0.0], [0.0, -5.0, 0.0]]))
        np.testing.assert_array_equal(sigma, 0.0)
        np.testing.assert_array_equal(albedo, 0.0)

    def test_query_keeps_constant_albedo(self):
        box = Primitive("box", (0.0, 0.0, 0.0), (0.6, 0.6, 0.6), (0.3, 0.5, 0.7), 50.0)
        scene = build_scene([box], resolution=16)
        points = np.random.default_rng(0).uniform(-0.55, 0.55, size=(32, 3))
        sigma, albedo = scene.query(points)
        assert np.all(sigma > 0.0)
        np.testing.assert_allclose(albedo, np.tile([0.3, 0.5, 0.7], (32, 1)), rtol=1e-12)

    def test_presets_build(self):
        for name in PRESETS:
            scene = build_scene(get_preset(name), resolution=8)
            assert scene.density_grid.max() > 0.0

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            get_preset("cathedral")

    def test_scene_file(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text(
            json.dumps(
                {
                    "resolution": 12,
                    "primitives": [
                        {"kind": "sphere", "center": [0.0, 0.0, 0.0], "size": 0.4, "albedo": [0.5, 0.5, 0.5]}
                    ],
                }
            )
        )
        primitives, extra = load_scene_spec(path)
        assert len(primitives) == 1 and primitives[0].kind == "sphere"
        assert extra == {"resolution": 12}


class TestPoses:
    """Orbit cameras looking at the scene center."""

    def test_ring_spacing(self):
        poses = generate_poses(4, radius=4.0, elevation_range=(0.0, 0.0))
        positions = np.array([p[:, 3] for p in poses])
        expected = [[0.0, 0.0, 4.0], [4.0, 0.0, 0.0], [0.0, 0.0, -4.0], [-4.0, 0.0, 0.0]]
        np.testing.assert_allclose(positions, expected, atol=1e-12)

    def test_rigid_and_centered(self):
        for pose in generate_poses(7, rng=np.random.default_rng(2)):
            assert is_rigid(pose)
            view_axis = -pose[:, 2]
            to_center = -pose[:, 3] / np.linalg.norm(pose[:, 3])
            np.testing.assert_allclose(view_axis, to_center, atol=1e-9)

    def test_seeded(self):
        a = generate_poses(5, rng=np.random.default_rng(11))
        b = generate_poses(5, rng=np.random.default_rng(11))
        for pa, pb in zip(a, b):
            np.testing.assert_array_equal(pa, pb)

    def test_too_few_views(self):
        with pytest.raises(ValueError):
            generate_poses(1)

    def test_look_at_straight_down(self):
        assert is_rigid(look_at([0.0, 5.0, 0.0]))

    def test_intrinsics_center(self):
        fx, fy, cx, cy = intrinsics_for(64, 48, 90.0)
        assert (cx, cy) == (32.0, 24.0)
        assert fx == pytest.approx(32.0)
