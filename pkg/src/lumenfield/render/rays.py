"""
Camera rays and stratified sampling along them.

Cameras follow the pinhole convention used throughout the datasets: the
camera looks down its local -z axis with +y up, and a 3x4 camera-to-world
pose maps camera coordinates to world coordinates.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ShapeError

DIRECTION_TOLERANCE = 1e-6


@dataclass
class Ray:
    """A single camera ray r(t) = o + t d for t in [t_n, t_f]."""

    o: Tuple[float, float, float]
    d: Tuple[float, float, float]
    t_n: float
    t_f: float
    pixel_coord: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not self.t_n < self.t_f:
            raise ValueError(f"ray needs t_n < t_f, got {self.t_n} >= {self.t_f}")
        if abs(float(np.linalg.norm(self.d)) - 1.0) > DIRECTION_TOLERANCE:
            raise ValueError("ray direction must be a unit vector")


@dataclass
class RayBatch:
    """
    A batch of R rays.

    When rays come from square pixel patches, ``patch_side`` is set and the
    rays are ordered patch-major, row-major inside each patch.
    """

    origins: np.ndarray
    directions: np.ndarray
    near: np.ndarray
    far: np.ndarray
    pixel_coords: np.ndarray
    view_ids: np.ndarray
    patch_side: Optional[int] = None

    def __post_init__(self):
        n = self.origins.shape[0]
        if self.origins.shape != (n, 3) or self.directions.shape != (n, 3):
            raise ShapeError("origins and directions must both be (R, 3)")
        if self.near.shape != (n,) or self.far.shape != (n,):
            raise ShapeError("near and far must be (R,)")
        if np.any(self.near >= self.far):
            raise ValueError("every ray needs near < far")
        norms = np.linalg.norm(self.directions, axis=-1)
        if np.any(np.abs(norms - 1.0) > DIRECTION_TOLERANCE):
            raise ValueError("ray directions must be unit vectors")
        if self.patch_side is not None and n % (self.patch_side ** 2) != 0:
            raise ShapeError(f"{n} rays do not split into {self.patch_side}x{self.patch_side} patches")

    def __len__(self) -> int:
        return int(self.origins.shape[0])

    @property
    def n_patches(self) -> int:
        if self.patch_side is None:
            return 0
        return len(self) // (self.patch_side ** 2)

    def subset(self, start: int, stop: int) -> "RayBatch":
        return RayBatch(
            self.origins[start:stop],
            self.directions[start:stop],
            self.near[start:stop],
            self.far[start:stop],
            self.pixel_coords[start:stop],
            self.view_ids[start:stop],
        )

    @classmethod
    def from_rays(cls, rays: Sequence[Ray], view_id: int = 0) -> "RayBatch":
        return cls(
            origins=np.array([r.o for r in rays], dtype=np.float64),
            directions=np.array([r.d for r in rays], dtype=np.float64),
            near=np.array([r.t_n for r in rays], dtype=np.float64),
            far=np.array([r.t_f for r in rays], dtype=np.float64),
            pixel_coords=np.array([r.pixel_coord for r in rays], dtype=np.int64),
            view_ids=np.full(len(rays), view_id, dtype=np.int64),
        )


@dataclass
class RaySample:
    """Quadrature points along each ray; arrays are (R, N) and (R, N, 3)."""

    t_values: np.ndarray
    deltas: np.ndarray
    points: np.ndarray
    directions: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.t_values.shape[1])


def camera_rays(
    pose: np.ndarray,
    intrinsics: Tuple[float, float, float, float],
    height: int,
    width: int,
    near: float,
    far: float,
    pixels: Optional[np.ndarray] = None,
    view_id: int = 0,
) -> RayBatch:
    """
    Build rays through pixel centers.

    Args:
        pose: 3x4 camera-to-world matrix
        intrinsics: (fx, fy, cx, cy) in pixels
        height: Image height
        width: Image width
        near: Near bound
        far: Far bound
        pixels: Optional (R, 2) array of (row, col); defaults to every pixel row-major
        view_id: View index recorded on each ray

    Returns:
        RayBatch for the requested pixels
    """
    pose = np.asarray(pose, dtype=np.float64).reshape(3, 4)
    fx, fy, cx, cy = intrinsics
    if pixels is None:
        rows, cols = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
        pixels = np.stack([rows.reshape(-1), cols.reshape(-1)], axis=-1)
    pixels = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)

    x = (pixels[:, 1] + 0.5 - cx) / fx
    y = -(pixels[:, 0] + 0.5 - cy) / fy
    local = np.stack([x, y, -np.ones_like(x)], axis=-1)
    directions = local @ pose[:, :3].T
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    origins = np.broadcast_to(pose[:, 3], directions.shape).copy()
    count = pixels.shape[0]
    return RayBatch(
        origins=origins,
        directions=directions,
        near=np.full(count, float(near)),
        far=np.full(count, float(far)),
        pixel_coords=pixels,
        view_ids=np.full(count, view_id, dtype=np.int64),
    )


def sample_stratified(
    rays: Union[Ray, RayBatch],
    n_samples: int,
    jitter: bool,
    rng: Optional[np.random.Generator] = None,
) -> RaySample:
    """
    Draw one sample per uniform bin of [t_n, t_f].

    Args:
        rays: A Ray or RayBatch
        n_samples: Samples per ray (>= 2)
        jitter: Uniform draw inside each bin; False gives bin midpoints
        rng: Generator used when jittering

    Returns:
        RaySample with strictly increasing t and the last delta capped at t_f - t_N
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    if isinstance(rays, Ray):
        rays = RayBatch.from_rays([rays])

    near = rays.near[:, None]
    far = rays.far[:, None]
    width = (far - near) / n_samples
    lower = near + width * np.arange(n_samples)[None, :]
    if jitter:
        if rng is None:
            raise ValueError("jittered sampling needs an rng")
        offsets = rng.random((len(rays), n_samples))
    else:
        offsets = np.full((len(rays), n_samples), 0.5)
    t_values = lower + width * offsets

    deltas = np.empty_like(t_values)
    deltas[:, :-1] = t_values[:, 1:] - t_values[:, :-1]
    deltas[:, -1] = rays.far - t_values[:, -1]

    points = rays.origins[:, None, :] + t_values[..., None] * rays.directions[:, None, :]
    directions = np.broadcast_to(rays.directions[:, None, :], points.shape).copy()
    return RaySample(t_values=t_values, deltas=deltas, points=points, directions=directions)
