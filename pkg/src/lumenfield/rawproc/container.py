"""
LFRW raw container.

Layout (little-endian): magic b"LFRW", version u32, height u32, width u32,
pattern code u32, then black level, white level, exposure ratio, beta and
delta as f64, then height * width f64 mosaic values in row-major order.
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import DatasetError
from .raw import PATTERN_CODES, RawImage

MAGIC = b"LFRW"
VERSION = 1
_HEADER = struct.Struct("<4sIIII5d")

_PATTERN_NAMES = {code: name for name, code in PATTERN_CODES.items()}


def write_raw(path: Union[str, Path], raw: RawImage) -> None:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        raw.height,
        raw.width,
        PATTERN_CODES[raw.pattern],
        raw.black_level,
        raw.white_level,
        raw.exposure_ratio,
        raw.beta,
        raw.delta,
    )
    payload = np.ascontiguousarray(raw.mosaic, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_raw(path: Union[str, Path]) -> RawImage:
    """
    Read an LFRW file.

    Raises:
        DatasetError: If the file is missing, truncated or not an LFRW container
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DatasetError(f"cannot read raw file {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise DatasetError(f"{path}: truncated LFRW header")
    magic, version, height, width, code, black, white, ratio, beta, delta = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DatasetError(f"{path} is not an LFRW raw file")
    if version != VERSION:
        raise DatasetError(f"{path}: unsupported LFRW version {version}")
    if code not in _PATTERN_NAMES:
        raise DatasetError(f"{path}: unknown Bayer pattern code {code}")
    payload = blob[_HEADER.size:]
    if len(payload) != 8 * height * width:
        raise DatasetError(f"{path}: expected {height}x{width} values, payload is {len(payload)} bytes")
    mosaic_values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(height, width)
    try:
        return RawImage(
            mosaic=mosaic_values,
            black_level=black,
            white_level=white,
            exposure_ratio=ratio,
            beta=beta,
            delta=delta,
            pattern=_PATTERN_NAMES[code],
        )
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
