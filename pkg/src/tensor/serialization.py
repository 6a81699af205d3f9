"""Flat binary weight container.

Layout: magic ``CAMPDW1``, u32 version, then per parameter: u32 name length,
UTF-8 name, u32 rank, rank x u64 extents, raw little-endian f64 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Dict, Mapping

import numpy as np

from ..errors import SerializationError
from ..version import FORMAT_VERSION
from .core import Tensor

MAGIC = b"CAMPDW1"
VERSION = FORMAT_VERSION


def dumps_weights(weights: Mapping[str, np.ndarray | Tensor]) -> bytes:
    buf = bytearray(MAGIC)
    buf += struct.pack("<I", VERSION)
    for name, value in weights.items():
        array = value.data if isinstance(value, Tensor) else np.asarray(value)
        array = np.ascontiguousarray(array, dtype="<f8")
        encoded = name.encode("utf-8")
        buf += struct.pack("<I", len(encoded))
        buf += encoded
        buf += struct.pack("<I", array.ndim)
        buf += struct.pack(f"<{array.ndim}Q", *array.shape)
        buf += array.tobytes()
    return bytes(buf)


def loads_weights(blob: bytes) -> Dict[str, np.ndarray]:
    if blob[: len(MAGIC)] != MAGIC:
        raise SerializationError("weight container: bad magic bytes")
    offset = len(MAGIC)
    (version,) = _unpack("<I", blob, offset)
    offset += 4
    if version != VERSION:
        raise SerializationError(f"weight container: unsupported version {version}")
    weights: Dict[str, np.ndarray] = {}
    while offset < len(blob):
        (name_len,) = _unpack("<I", blob, offset)
        offset += 4
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (rank,) = _unpack("<I", blob, offset)
        offset += 4
        shape = _unpack(f"<{rank}Q", blob, offset)
        offset += 8 * rank
        count = int(np.prod(shape)) if rank else 1
        end = offset + 8 * count
        if end > len(blob):
            raise SerializationError(f"weight container: truncated payload for {name!r}")
        if name in weights:
            raise SerializationError(f"weight container: duplicate parameter {name!r}")
        weights[name] = np.frombuffer(blob[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        offset = end
    return weights


def save_weights(path: str | Path, weights: Mapping[str, np.ndarray | Tensor]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_weights(weights))
    return path


def load_weights(path: str | Path) -> Dict[str, np.ndarray]:
    return loads_weights(Path(path).read_bytes())


def _unpack(fmt: str, blob: bytes, offset: int):
    size = struct.calcsize(fmt)
    if offset + size > len(blob):
        raise SerializationError("weight container: truncated header")
    return struct.unpack_from(fmt, blob, offset)
