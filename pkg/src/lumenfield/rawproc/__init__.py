"""Raw-domain data handling and the minimal display path."""

from .bayer import bayer_masks, demosaic_bilinear, mosaic
from .container import read_raw, write_raw
from .display import gray_world_gains, read_image, to_srgb, write_image
from .raw import (
    EXPOSURE_RATIOS,
    LinearRGBImage,
    RawImage,
    add_noise,
    as_generator,
    encode_sensor_levels,
    heteroscedastic_noise,
    scale_exposure,
    subtract_black_level,
)

__all__ = [
    "EXPOSURE_RATIOS",
    "LinearRGBImage",
    "RawImage",
    "add_noise",
    "as_generator",
    "bayer_masks",
    "demosaic_bilinear",
    "encode_sensor_levels",
    "gray_world_gains",
    "heteroscedastic_noise",
    "mosaic",
    "read_image",
    "read_raw",
    "scale_exposure",
    "subtract_black_level",
    "to_srgb",
    "write_image",
    "write_raw",
]
