"""
Sinusoidal positional encoding for field inputs.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass
class EncodingConfig:
    """Frequency counts for position and direction encodings."""

    position_frequencies: int = 6
    direction_frequencies: int = 2

    def __post_init__(self):
        if self.position_frequencies < 0 or self.direction_frequencies < 0:
            raise ConfigError("encoding frequency counts must be non-negative")

    @property
    def position_dim(self) -> int:
        return encoded_dim(self.position_frequencies)

    @property
    def direction_dim(self) -> int:
        return encoded_dim(self.direction_frequencies)


def encoded_dim(frequencies: int) -> int:
    """Length of the encoding of a 3-vector: 3 + 6 * L."""
    return 3 + 6 * frequencies


def encode(p: np.ndarray, frequencies: int) -> np.ndarray:
    """
    Encode 3-vectors as ``[p, sin(2^0 pi p), cos(2^0 pi p), ..., cos(2^(L-1) pi p)]``.

    Within an octave the sine and cosine of each coordinate sit next to each
    other: ``sin(x), cos(x), sin(y), cos(y), sin(z), cos(z)``.

    Args:
        p: Array of shape (..., 3)
        frequencies: Number of octaves L

    Returns:
        Array of shape (..., 3 + 6 * L)
    """
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != 3:
        raise ValueError(f"encode expects trailing dimension 3, got {p.shape}")
    features = [p]
    for k in range(frequencies):
        scaled = (2.0 ** k) * np.pi * p
        pairs = np.stack([np.sin(scaled), np.cos(scaled)], axis=-1)
        features.append(pairs.reshape(p.shape[:-1] + (6,)))
    return np.concatenate(features, axis=-1)
