"""
RGGB Bayer mosaicking and bilinear demosaicing.

Site layout per 2x2 tile::

    R G
    G B
"""

from typing import Union

import numpy as np
from scipy import ndimage

from ..errors import ShapeError
from .raw import RawImage, LinearRGBImage

# Bilinear kernels: same-channel neighbors at distance 1 (and diagonals for
# R/B) averaged; a known site keeps its own value because its weight is 1.
_RB_KERNEL = np.array([[0.25, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.25]])
_G_KERNEL = np.array([[0.0, 0.25, 0.0], [0.25, 1.0, 0.25], [0.0, 0.25, 0.0]])


def bayer_masks(height: int, width: int) -> np.ndarray:
    """
    Boolean channel masks for an RGGB mosaic.

    Returns:
        (H, W, 3) array; exactly one channel is True per pixel
    """
    if height % 2 or width % 2:
        raise ShapeError(f"Bayer dimensions must be even, got {height}x{width}")
    rows = np.arange(height)[:, None] % 2
    cols = np.arange(width)[None, :] % 2
    masks = np.zeros((height, width, 3), dtype=bool)
    masks[..., 0] = (rows == 0) & (cols == 0)
    masks[..., 1] = rows != cols
    masks[..., 2] = (rows == 1) & (cols == 1)
    return masks


def mosaic(rgb: Union[LinearRGBImage, np.ndarray]) -> RawImage:
    """
    Sample each pixel's Bayer-site channel.

    Args:
        rgb: Linear image of shape (H, W, 3), H and W even

    Returns:
        Normalized RawImage (black 0, white 1)
    """
    pixels = rgb.pixels if isinstance(rgb, LinearRGBImage) else np.asarray(rgb, dtype=np.float64)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ShapeError(f"mosaic expects (H, W, 3), got {pixels.shape}")
    masks = bayer_masks(pixels.shape[0], pixels.shape[1])
    return RawImage(mosaic=np.sum(pixels * masks, axis=-1))


def demosaic_bilinear(raw: Union[RawImage, np.ndarray]) -> LinearRGBImage:
    """
    Per-channel bilinear interpolation of the missing Bayer sites.

    Borders mirror about the edge pixel, which keeps the RGGB parity, so
    known sites pass through exactly and a constant mosaic stays constant.

    Args:
        raw: RawImage or (H, W) mosaic with even dimensions

    Returns:
        LinearRGBImage of shape (H, W, 3)
    """
    values = raw.mosaic if isinstance(raw, RawImage) else np.asarray(raw, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"demosaic expects a 2-D mosaic, got {values.shape}")
    masks = bayer_masks(*values.shape)
    channels = []
    for k, kernel in enumerate((_RB_KERNEL, _G_KERNEL, _RB_KERNEL)):
        sparse = np.where(masks[..., k], values, 0.0)
        channels.append(ndimage.convolve(sparse, kernel, mode="mirror"))
    return LinearRGBImage(np.maximum(np.stack(channels, axis=-1), 0.0))
