"""
Voxelized oracle scenes built from spheres and boxes.

Density and albedo live on a D^3 grid of voxel centers spanning an
axis-aligned bounding box. Lookups are trilinear inside the box and zero
outside it; albedo is interpolated density-weighted, so a constant-albedo
object keeps its exact color right up to its surface.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from ..config import load_config_file
from ..errors import ConfigError

logger = logging.getLogger(__name__)

PRIMITIVE_KINDS = ("sphere", "box")
DEFAULT_BOUNDS = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


@dataclass
class Primitive:
    """
    A sphere (``size`` = radius) or an axis-aligned box (``size`` = half extents).
    """

    kind: str
    center: Tuple[float, float, float]
    size: Union[float, Tuple[float, float, float]]
    albedo: Tuple[float, float, float]
    density: float = 50.0

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise ConfigError(f"unknown primitive kind '{self.kind}', expected one of {PRIMITIVE_KINDS}")
        self.center = tuple(float(c) for c in self.center)
        self.albedo = tuple(float(a) for a in self.albedo)
        if len(self.center) != 3 or len(self.albedo) != 3:
            raise ConfigError("primitive center and albedo need three components")
        if not all(0.0 <= a <= 1.0 for a in self.albedo):
            raise ConfigError(f"albedo must lie in [0, 1], got {self.albedo}")
        if self.density <= 0.0:
            raise ConfigError(f"primitive density must be positive, got {self.density}")
        if np.any(np.asarray(self.size, dtype=np.float64) <= 0.0):
            raise ConfigError(f"primitive size must be positive, got {self.size}")

    @property
    def extents(self) -> np.ndarray:
        """Half extents of the primitive's bounding box."""
        size = np.asarray(self.size, dtype=np.float64)
        return np.broadcast_to(size, (3,)).copy()

    def contains(self, points: np.ndarray) -> np.ndarray:
        offsets = points - np.asarray(self.center)
        if self.kind == "sphere":
            return np.sum(offsets**2, axis=-1) <= float(self.size) ** 2
        return np.all(np.abs(offsets) <= self.extents, axis=-1)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "Primitive":
        known = {"kind", "center", "size", "albedo", "density"}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown primitive keys: {', '.join(sorted(unknown))}")
        size = values.get("size", 0.0)
        if isinstance(size, (list, tuple)):
            size = tuple(float(s) for s in size)
        return cls(
            kind=values.get("kind", ""),
            center=tuple(values.get("center", (0.0, 0.0, 0.0))),
            size=size,
            albedo=tuple(values.get("albedo", (0.5, 0.5, 0.5))),
            density=float(values.get("density", 50.0)),
        )

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["center"] = list(self.center)
        values["albedo"] = list(self.albedo)
        if isinstance(self.size, tuple):
            values["size"] = list(self.size)
        return values


@dataclass
class SyntheticScene:
    """Density and albedo voxel grids over an axis-aligned box."""

    density_grid: np.ndarray
    albedo_grid: np.ndarray
    bounds: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_BOUNDS))

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=np.float64).reshape(2, 3)
        d = self.density_grid.shape
        if len(d) != 3 or self.albedo_grid.shape != d + (3,):
            raise ValueError("density grid must be D^3 and albedo grid D^3 x 3")
        if not (np.all(np.isfinite(self.density_grid)) and np.all(np.isfinite(self.albedo_grid))):
            raise ValueError("scene grids must be finite")
        if np.any(self.density_grid < 0.0):
            raise ValueError("scene density must be nonnegative")
        if np.any(self.bounds[0] >= self.bounds[1]):
            raise ValueError("scene bounds must have lo < hi on every axis")

    @property
    def resolution(self) -> Tuple[int, int, int]:
        return tuple(self.density_grid.shape)

    @property
    def voxel_size(self) -> np.ndarray:
        return (self.bounds[1] - self.bounds[0]) / np.asarray(self.resolution)

    def voxel_centers(self) -> np.ndarray:
        """(D, D, D, 3) world positions of the voxel centers."""
        axes = [
            self.bounds[0, k] + (np.arange(n) + 0.5) * self.voxel_size[k]
            for k, n in enumerate(self.resolution)
        ]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def query(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Trilinear density and albedo at arbitrary points.

        Args:
            points: (M, 3) world positions

        Returns:
            (sigma (M,), albedo (M, 3)); both zero outside the bounds
        """
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        inside = np.all((points >= self.bounds[0]) & (points <= self.bounds[1]), axis=-1)
        coords = ((points - self.bounds[0]) / self.voxel_size - 0.5).T

        sigma = ndimage.map_coordinates(self.density_grid, coords, order=1, mode="nearest")
        weighted = np.stack(
            [
                ndimage.map_coordinates(
                    self.density_grid * self.albedo_grid[..., k], coords, order=1, mode="nearest"
                )
                for k in range(3)
            ],
            axis=-1,
        )
        sigma = np.where(inside, np.maximum(sigma, 0.0), 0.0)
        albedo = np.zeros_like(weighted)
        occupied = sigma > 0.0
        albedo[occupied] = weighted[occupied] / sigma[occupied, None]
        return sigma, np.clip(albedo, 0.0, 1.0)


def build_scene(
    primitives: Sequence[Primitive],
    resolution: int = 48,
    bounds: Sequence[Sequence[float]] = DEFAULT_BOUNDS,
) -> SyntheticScene:
    """
    Voxelize primitives at the voxel centers.

    Overlaps keep the maximum density; albedo is taken from the last
    primitive covering a voxel.

    Args:
        primitives: Spheres and boxes, each within ``bounds``
        resolution: Voxels per axis
        bounds: ((lo_x, lo_y, lo_z), (hi_x, hi_y, hi_z))

    Returns:
        SyntheticScene with the voxelized grids
    """
    if resolution < 2:
        raise ConfigError(f"scene resolution must be >= 2, got {resolution}")
    box = np.asarray(bounds, dtype=np.float64).reshape(2, 3)
    density = np.zeros((resolution,) * 3)
    albedo = np.zeros((resolution,) * 3 + (3,))
    scene = SyntheticScene(density, albedo, box)
    centers = scene.voxel_centers()

    for primitive in primitives:
        center = np.asarray(primitive.center)
        if np.any(center - primitive.extents < box[0]) or np.any(center + primitive.extents > box[1]):
            raise ConfigError(f"{primitive.kind} at {primitive.center} leaves the scene bounds")
        mask = primitive.contains(centers)
        density[mask] = np.maximum(density[mask], primitive.density)
        albedo[mask] = primitive.albedo

    logger.debug(
        "voxelized %d primitives into %d^3 grid, %.1f%% occupied",
        len(primitives),
        resolution,
        100.0 * float(np.mean(density > 0.0)),
    )
    return scene


def load_scene_spec(path: Union[str, Path]) -> Tuple[List[Primitive], Dict[str, Any]]:
    """
    Read a scene description file (JSON or TOML).

    The file holds a ``primitives`` list and optional ``resolution`` and
    ``bounds`` entries.

    Returns:
        (primitives, extra build arguments)
    """
    data = load_config_file(path)
    unknown = set(data) - {"primitives", "resolution", "bounds"}
    if unknown:
        raise ConfigError(f"{path}: unknown scene keys {', '.join(sorted(unknown))}")
    primitives = [Primitive.from_dict(p) for p in data.get("primitives", [])]
    extra: Dict[str, Any] = {}
    if "resolution" in data:
        extra["resolution"] = int(data["resolution"])
    if "bounds" in data:
        extra["bounds"] = data["bounds"]
    return primitives, extra
