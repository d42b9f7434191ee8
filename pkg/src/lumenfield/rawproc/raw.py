"""
Raw sensor images: black/white levels, exposure scaling and the
heteroscedastic Gaussian noise model.

Values are linear in photon count. After :func:`subtract_black_level` a
RawImage is normalized so black maps to 0 and white to 1.
"""

import logging
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ..errors import ShapeError

logger = logging.getLogger(__name__)

RGGB = "RGGB"
PATTERN_CODES = {RGGB: 0}

RngLike = Union[int, np.random.Generator, None]

# The darkness sweep ratios used for exposure experiments.
EXPOSURE_RATIOS = (0.3, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 1.8)


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept a seed or a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class RawImage:
    """
    Single-channel Bayer mosaic with its sensor metadata.

    ``beta`` and ``delta`` record the noise model the image was generated
    with (zero for clean images); ``exposure_ratio`` is the cumulative
    scaling applied since capture.
    """

    mosaic: np.ndarray
    black_level: float = 0.0
    white_level: float = 1.0
    exposure_ratio: float = 1.0
    beta: float = 0.0
    delta: float = 0.0
    pattern: str = RGGB

    def __post_init__(self):
        self.mosaic = np.asarray(self.mosaic, dtype=np.float64)
        if self.mosaic.ndim != 2:
            raise ShapeError(f"mosaic must be 2-D, got shape {self.mosaic.shape}")
        height, width = self.mosaic.shape
        if height % 2 or width % 2:
            raise ShapeError(f"mosaic dimensions must be even, got {height}x{width}")
        if self.pattern not in PATTERN_CODES:
            raise ValueError(f"unsupported Bayer pattern '{self.pattern}'")
        if not self.black_level < self.white_level:
            raise ValueError(
                f"black level {self.black_level} must be below white level {self.white_level}"
            )
        if self.exposure_ratio <= 0.0:
            raise ValueError("exposure_ratio must be positive")
        if not np.all(np.isfinite(self.mosaic)):
            raise ValueError("mosaic contains NaN/Inf")
        if np.any(self.mosaic < 0.0):
            raise ValueError("mosaic values must be nonnegative")

    @property
    def height(self) -> int:
        return int(self.mosaic.shape[0])

    @property
    def width(self) -> int:
        return int(self.mosaic.shape[1])

    @property
    def is_normalized(self) -> bool:
        return self.black_level == 0.0 and self.white_level == 1.0


@dataclass
class LinearRGBImage:
    """H x W x 3 linear-domain image with finite nonnegative values."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ShapeError(f"RGB image must be (H, W, 3), got {self.pixels.shape}")
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("RGB image contains NaN/Inf")
        if np.any(self.pixels < 0.0):
            raise ValueError("linear RGB values must be nonnegative")

    @property
    def shape(self):
        return self.pixels.shape


def subtract_black_level(raw: RawImage) -> RawImage:
    """
    Remove the sensor offset and normalize into [0, 1].

    Args:
        raw: Raw image carrying black and white levels

    Returns:
        RawImage with max(mosaic - black, 0) / (white - black), black 0, white 1
    """
    span = raw.white_level - raw.black_level
    values = np.maximum(raw.mosaic - raw.black_level, 0.0) / span
    return replace(raw, mosaic=values, black_level=0.0, white_level=1.0)


def encode_sensor_levels(
    raw: RawImage, black_level: float = 64.0, white_level: float = 1023.0
) -> RawImage:
    """
    Map a normalized raw back to sensor digital numbers.

    Values above 1 saturate at the white level.
    """
    if not raw.is_normalized:
        raise ValueError("encode_sensor_levels expects a black-level-subtracted raw")
    span = white_level - black_level
    values = black_level + np.clip(raw.mosaic, 0.0, 1.0) * span
    return replace(raw, mosaic=values, black_level=black_level, white_level=white_level)


def scale_exposure(raw: RawImage, gamma: float) -> RawImage:
    """
    Simulate a different exposure time: I_gamma = I_raw * gamma.

    Args:
        raw: Black-level-subtracted raw image
        gamma: Exposure ratio (> 0)

    Returns:
        Scaled RawImage; ``exposure_ratio`` accumulates the factor
    """
    if gamma <= 0.0:
        raise ValueError(f"exposure ratio must be positive, got {gamma}")
    if raw.black_level != 0.0:
        raise ValueError("subtract the black level before scaling exposure")
    return replace(
        raw,
        mosaic=raw.mosaic * gamma,
        exposure_ratio=raw.exposure_ratio * gamma,
    )


def heteroscedastic_noise(
    values: np.ndarray, beta: float, delta: float, rng: RngLike = None
) -> np.ndarray:
    """
    Draw v + n with n ~ N(0, beta^2 v + delta^2), without clamping.

    Args:
        values: Clean nonnegative signal
        beta: Signal-dependent (shot) noise coefficient
        delta: Signal-independent (read) noise level
        rng: Seed or Generator

    Returns:
        Noisy values of the same shape; may be negative
    """
    values = np.asarray(values, dtype=np.float64)
    if np.any(values < 0.0):
        raise ValueError("noise model needs a nonnegative clean signal")
    if beta < 0.0 or delta < 0.0:
        raise ValueError("beta and delta must be nonnegative")
    std = np.sqrt(beta * beta * values + delta * delta)
    if beta == 0.0 and delta == 0.0:
        return values.copy()
    generator = as_generator(rng)
    return values + generator.standard_normal(values.shape) * std


def add_noise(
    clean: RawImage, beta: float, delta: float, rng: RngLike = None
) -> RawImage:
    """
    Apply the heteroscedastic noise model and clamp at zero.

    Args:
        clean: Clean raw image (nonnegative)
        beta: Signal-dependent noise coefficient
        delta: Signal-independent noise level
        rng: Seed or Generator; a fixed seed reproduces the draw exactly

    Returns:
        Noisy RawImage recording (beta, delta)
    """
    noisy = np.maximum(heteroscedastic_noise(clean.mosaic, beta, delta, rng), 0.0)
    clipped = float(np.mean(noisy == 0.0)) if noisy.size else 0.0
    if clipped > 0.25:
        logger.debug("noise clamped %.1f%% of sites to zero", 100.0 * clipped)
    return replace(clean, mosaic=noisy, beta=float(beta), delta=float(delta))

