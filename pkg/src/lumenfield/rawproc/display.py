"""
Minimal display path: white balance, power-law gamma, 8-bit quantization,
and image file I/O.
"""

import logging
from pathlib import Path
from typing import Sequence, Tuple, Union

import imageio.v2 as imageio
import numpy as np

from ..errors import ShapeError
from .raw import LinearRGBImage

logger = logging.getLogger(__name__)

DISPLAY_GAMMA = 2.2

ImageLike = Union[LinearRGBImage, np.ndarray]


def _pixels(rgb: ImageLike) -> np.ndarray:
    if isinstance(rgb, LinearRGBImage):
        return rgb.pixels
    return np.asarray(rgb, dtype=np.float64)


def to_srgb(
    rgb: ImageLike,
    wb_gains: Sequence[float] = (1.0, 1.0, 1.0),
    display_gamma: float = DISPLAY_GAMMA,
) -> np.ndarray:
    """
    Convert a linear image to 8-bit display values.

    Args:
        rgb: Linear image, shape (..., 3)
        wb_gains: Per-channel white-balance gains
        display_gamma: Power-law display gamma (> 0)

    Returns:
        uint8 array: floor(255 * clamp(rgb * gains, 0, 1)^(1/gamma) + 0.5)
    """
    if display_gamma <= 0.0:
        raise ValueError(f"display_gamma must be positive, got {display_gamma}")
    pixels = _pixels(rgb)
    if pixels.shape[-1] != 3:
        raise ShapeError(f"to_srgb expects a trailing channel axis of 3, got {pixels.shape}")
    balanced = np.clip(pixels * np.asarray(wb_gains, dtype=np.float64), 0.0, 1.0)
    encoded = balanced ** (1.0 / display_gamma)
    return np.floor(255.0 * encoded + 0.5).astype(np.uint8)


def gray_world_gains(rgb: ImageLike) -> Tuple[float, float, float]:
    """
    Gray-world white-balance gains K_avg / mean_k.

    Raises:
        ValueError: If a channel mean is zero
    """
    means = _pixels(rgb).reshape(-1, 3).mean(axis=0)
    if np.any(means <= 0.0):
        raise ValueError(f"gray-world gains need positive channel means, got {means}")
    gains = means.mean() / means
    return (float(gains[0]), float(gains[1]), float(gains[2]))


def write_image(path: Union[str, Path], image: np.ndarray) -> Path:
    """
    Write an 8-bit RGB image; the format follows the file suffix.

    Returns:
        The path written
    """
    path = Path(path)
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError(f"write_image expects uint8, got {image.dtype}")
    imageio.imwrite(path, image)
    logger.debug("wrote %s", path)
    return path


def read_image(path: Union[str, Path]) -> np.ndarray:
    """Read an 8-bit RGB image written by :func:`write_image`."""
    image = np.asarray(imageio.imread(Path(path)))
    if image.ndim == 2:
        image = np.repeat(image[..., None], 3, axis=-1)
    return image[..., :3].astype(np.uint8)
