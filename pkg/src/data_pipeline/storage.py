"""Binary dataset container.

Layout (little-endian): magic ``CAMPDDS``, version byte, u32 header length,
UTF-8 JSON header, u32 record count, then per record: env_id u32,
problem_id u32, seed u64, context count u32, per context (type_id u32,
dim u32, dim x f64), and the H x d_q trajectory as f64.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import BinaryIO, List

import numpy as np
from pydantic import ValidationError

from ..errors import SerializationError
from ..schemas.dataset import DatasetHeader
from ..version import FORMAT_VERSION
from .context import ContextInstance
from .dataset import Dataset, DatasetRecord

MAGIC = b"CAMPDDS"
VERSION = FORMAT_VERSION

_U32 = struct.Struct("<I")
_RECORD_HEAD = struct.Struct("<IIQI")
_CONTEXT_HEAD = struct.Struct("<II")


def _write(stream: BinaryIO, dataset: Dataset) -> None:
    header = dataset.header.model_dump_json().encode("utf-8")
    stream.write(MAGIC)
    stream.write(bytes([VERSION]))
    stream.write(_U32.pack(len(header)))
    stream.write(header)
    stream.write(_U32.pack(len(dataset)))
    shape = (dataset.horizon, dataset.d_q)
    for record in dataset.records:
        trajectory = np.asarray(record.trajectory, dtype="<f8")
        if trajectory.shape != shape:
            raise SerializationError(f"record trajectory shape {trajectory.shape} != header {shape}")
        stream.write(_RECORD_HEAD.pack(record.env_id, record.problem_id, record.seed, len(record.context)))
        for instance in record.context:
            stream.write(_CONTEXT_HEAD.pack(instance.type_id, len(instance.params)))
            stream.write(np.asarray(instance.params, dtype="<f8").tobytes())
        stream.write(trajectory.tobytes())


def dumps_dataset(dataset: Dataset) -> bytes:
    buffer = io.BytesIO()
    _write(buffer, dataset)
    return buffer.getvalue()


def write_dataset(path: str | Path, dataset: Dataset) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fout:
        _write(fout, dataset)
    return path


class _Reader:
    def __init__(self, blob: bytes) -> None:
        self.blob = blob
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.blob):
            raise SerializationError(f"dataset truncated while reading {what} at byte {self.offset}")
        chunk = self.blob[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct, what: str) -> tuple:
        return fmt.unpack(self.take(fmt.size, what))

    def floats(self, count: int, what: str) -> np.ndarray:
        return np.frombuffer(self.take(8 * count, what), dtype="<f8").astype(np.float64)


def loads_dataset(blob: bytes) -> Dataset:
    reader = _Reader(blob)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise SerializationError("not a dataset file (bad magic bytes)")
    (version,) = reader.take(1, "version")
    if version != VERSION:
        raise SerializationError(f"unsupported dataset version {version} (expected {VERSION})")
    (header_len,) = reader.unpack(_U32, "header length")
    try:
        header = DatasetHeader.model_validate_json(reader.take(header_len, "header"))
    except ValidationError as exc:
        raise SerializationError(f"invalid dataset header: {exc}") from exc
    (count,) = reader.unpack(_U32, "record count")
    size = header.horizon * header.d_q
    records: List[DatasetRecord] = []
    for index in range(count):
        env_id, problem_id, seed, n_ctx = reader.unpack(_RECORD_HEAD, f"record {index}")
        context = []
        for _ in range(n_ctx):
            type_id, dim = reader.unpack(_CONTEXT_HEAD, f"record {index} context")
            params = reader.floats(dim, f"record {index} context params")
            context.append(ContextInstance(type_id, tuple(float(v) for v in params)))
        trajectory = reader.floats(size, f"record {index} trajectory").reshape(header.horizon, header.d_q)
        records.append(DatasetRecord(trajectory, tuple(context), env_id, problem_id, seed))
    if reader.offset != len(blob):
        raise SerializationError(f"{len(blob) - reader.offset} trailing bytes after {count} records")
    return Dataset(header, records)


def read_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise SerializationError(f"dataset file not found: {path}")
    return loads_dataset(path.read_bytes())
