"""Trajectory batch files: binary (N, H, d_q as u64 + f64 payload) and CSV."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from ..errors import SerializationError

_HEADER = struct.Struct("<QQQ")


def dumps_batch(batch: np.ndarray) -> bytes:
    batch = np.asarray(batch, dtype="<f8")
    if batch.ndim != 3:
        raise SerializationError(f"trajectory batch must be (N, H, d_q), got shape {batch.shape}")
    return _HEADER.pack(*batch.shape) + np.ascontiguousarray(batch).tobytes()


def loads_batch(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise SerializationError("trajectory batch: truncated header")
    shape = _HEADER.unpack_from(blob)
    expected = _HEADER.size + 8 * int(np.prod(shape))
    if len(blob) != expected:
        raise SerializationError(f"trajectory batch: expected {expected} bytes for shape {shape}, got {len(blob)}")
    return np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).astype(np.float64).reshape(shape)


def write_batch(path: str | Path, batch: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_batch(batch))
    return path


def read_batch(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise SerializationError(f"trajectory batch not found: {path}")
    return loads_batch(path.read_bytes())


def write_batch_csv(path: str | Path, batch: np.ndarray) -> Path:
    """Rows ``sample,waypoint,q0,q1,...``."""
    batch = np.asarray(batch, dtype=np.float64)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fout:
        writer = csv.writer(fout)
        writer.writerow(["sample", "waypoint", *(f"q{i}" for i in range(batch.shape[2]))])
        for n, trajectory in enumerate(batch):
            for h, q in enumerate(trajectory):
                writer.writerow([n, h, *(repr(float(v)) for v in q)])
    return path
