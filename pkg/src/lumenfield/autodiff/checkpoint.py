"""
Flat binary tensor checkpoints.

Layout (little-endian): magic b"LFCK", version u32, tensor count u32, then per
tensor: name length u32, UTF-8 name, rank u32, rank x u64 extents, f64 payload.
"""

import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from ..errors import CheckpointError
from .tensor import Tensor

MAGIC = b"LFCK"
VERSION = 1

PathLike = Union[str, Path]


def save_tensors(path: PathLike, tensors: Mapping[str, Union[Tensor, np.ndarray]]) -> None:
    """Write named tensors in insertion order."""
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, value in tensors.items():
        array = value.data if isinstance(value, Tensor) else np.asarray(value, dtype=np.float64)
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_tensors(path: PathLike) -> Dict[str, np.ndarray]:
    """
    Read a checkpoint written by :func:`save_tensors`.

    Raises:
        CheckpointError: On a bad magic, unsupported version or truncated payload
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (bad magic)")
    try:
        version, count = struct.unpack_from("<II", blob, 4)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        offset = 12
        tensors: Dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{rank}Q", blob, offset)
            offset += 8 * rank
            n = int(np.prod(shape)) if rank else 1
            payload = blob[offset:offset + 8 * n]
            if len(payload) != 8 * n:
                raise CheckpointError(f"{path}: truncated payload for '{name}'")
            tensors[name] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(shape)
            offset += 8 * n
    except struct.error as exc:
        raise CheckpointError(f"{path}: truncated header ({exc})") from exc
    return tensors
