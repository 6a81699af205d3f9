"""Helpers to load model architecture presets."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Mapping

import yaml
from pydantic import ValidationError

from ..errors import ConfigError
from .config import ModelConfig

DEFAULT_MODELS_PATH = Path(os.getenv("MODELS_CONFIG_PATH", "configs/models.yaml"))

# Fallback when configs/models.yaml is not on disk (e.g. an installed package).
BUILTIN_PRESETS: Dict[str, Dict[str, Any]] = {
    "tiny": {"d_z": 8, "depth": 2, "channels": [8, 16], "n_heads": 2, "head_dim": 4, "groups": 4, "horizon": 8},
    "desk": {"d_z": 32, "depth": 3, "channels": [32, 64, 128], "n_heads": 4, "head_dim": 8, "groups": 8},
    "paper": {"d_z": 64, "depth": 4, "channels": [32, 64, 128, 256], "n_heads": 4, "head_dim": 64, "groups": 8},
}


def load_presets(path: str | Path = DEFAULT_MODELS_PATH) -> Dict[str, Dict[str, Any]]:
    data = _load_yaml(path)
    presets = data.get("presets")
    return dict(presets) if presets else dict(BUILTIN_PRESETS)


def resolve_model_config(
    preset: str | None,
    overrides: Mapping[str, Any] | None = None,
    *,
    path: str | Path = DEFAULT_MODELS_PATH,
) -> ModelConfig:
    """Preset values, then ``overrides`` (horizon, d_q, t_train, explicit fields) on top."""
    values: Dict[str, Any] = {}
    if preset is not None:
        presets = load_presets(path)
        if preset not in presets:
            raise ConfigError(f"unknown model preset {preset!r} (available: {sorted(presets)})")
        values.update(presets[preset])
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ModelConfig.model_validate(values)
    except ValidationError as exc:
        raise ConfigError(f"model config: {exc.errors()[0]['msg']}") from exc


def _load_yaml(path: str | Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as fin:
        return yaml.safe_load(fin) or {}
