"""
Camera poses orbiting the scene.

Poses are 3x4 camera-to-world matrices [R | t]. The columns of R are the
camera's right, up and backward axes in world coordinates; the camera looks
down its local -z axis.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np


def look_at(
    eye: Sequence[float],
    target: Sequence[float] = (0.0, 0.0, 0.0),
    up: Sequence[float] = (0.0, 1.0, 0.0),
) -> np.ndarray:
    """
    Camera-to-world pose at ``eye`` looking at ``target``.

    Returns:
        3x4 matrix with an orthonormal rotation of determinant +1
    """
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(forward)
    if norm == 0.0:
        raise ValueError("camera position coincides with the look-at target")
    forward /= norm
    up = np.asarray(up, dtype=np.float64)
    if np.linalg.norm(np.cross(forward, up)) < 1e-9:
        # looking straight along the up axis
        up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    true_up = np.cross(right, forward)
    rotation = np.stack([right, true_up, -forward], axis=1)
    return np.concatenate([rotation, eye[:, None]], axis=1)


def generate_poses(
    n_views: int,
    radius: float = 4.0,
    elevation_range: Tuple[float, float] = (15.0, 35.0),
    rng: Optional[np.random.Generator] = None,
    target: Sequence[float] = (0.0, 0.0, 0.0),
) -> List[np.ndarray]:
    """
    Cameras evenly spaced in azimuth on a ring around ``target``.

    Args:
        n_views: Number of cameras (>= 2)
        radius: Distance from the target
        elevation_range: Elevation bounds in degrees; a zero-width range is fixed
        rng: Generator for elevation draws (seed 0 when omitted)
        target: Look-at point

    Returns:
        List of 3x4 camera-to-world poses
    """
    if n_views < 2:
        raise ValueError(f"need at least 2 views, got {n_views}")
    if radius <= 0.0:
        raise ValueError(f"orbit radius must be positive, got {radius}")
    low, high = elevation_range
    if low > high:
        raise ValueError("elevation_range must be (low, high)")
    generator = rng if rng is not None else np.random.default_rng(0)
    center = np.asarray(target, dtype=np.float64)

    poses = []
    for i in range(n_views):
        azimuth = 2.0 * np.pi * i / n_views
        elevation = np.radians(low if low == high else generator.uniform(low, high))
        offset = radius * np.array(
            [
                np.cos(elevation) * np.sin(azimuth),
                np.sin(elevation),
                np.cos(elevation) * np.cos(azimuth),
            ]
        )
        poses.append(look_at(center + offset, center))
    return poses


def intrinsics_for(width: int, height: int, fov_degrees: float = 40.0) -> Tuple[float, float, float, float]:
    """Pinhole (fx, fy, cx, cy) for a horizontal field of view."""
    if not 0.0 < fov_degrees < 180.0:
        raise ValueError(f"field of view must lie in (0, 180), got {fov_degrees}")
    focal = 0.5 * width / np.tan(0.5 * np.radians(fov_degrees))
    return (float(focal), float(focal), 0.5 * width, 0.5 * height)


def is_rigid(pose: np.ndarray, tolerance: float = 1e-9) -> bool:
    """True when the rotation block is orthonormal with determinant +1."""
    rotation = np.asarray(pose, dtype=np.float64).reshape(3, 4)[:, :3]
    orthonormal = np.allclose(rotation.T @ rotation, np.eye(3), atol=tolerance)
    return bool(orthonormal and abs(np.linalg.det(rotation) - 1.0) < tolerance)
