"""Model checkpoint: one JSON config line, a newline, then the weight container."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import CheckpointError, SerializationError
from ..tensor import dumps_weights, loads_weights
from .config import ModelConfig
from .unet import NoiseModel, build_model


def dumps_checkpoint(model: NoiseModel) -> bytes:
    header = json.dumps(model.config.model_dump(mode="json"), sort_keys=True).encode("utf-8")
    return header + b"\n" + dumps_weights(model.named_parameters())


def save_checkpoint(path: str | Path, model: NoiseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_checkpoint(model))
    return path


def loads_checkpoint(blob: bytes) -> NoiseModel:
    header, sep, payload = blob.partition(b"\n")
    if not sep:
        raise CheckpointError("checkpoint: missing config header line")
    try:
        config = ModelConfig.model_validate(json.loads(header.decode("utf-8")))
        weights = loads_weights(payload)
    except (ValueError, SerializationError) as exc:
        raise CheckpointError(f"checkpoint: {exc}") from exc
    model = build_model(config)
    model.load_state(weights)
    return model


def load_checkpoint(path: str | Path) -> NoiseModel:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    return loads_checkpoint(path.read_bytes())
