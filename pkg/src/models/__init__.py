"""Noise-prediction network: encoders, attention bridge, temporal U-Net."""

from .checkpoint import dumps_checkpoint, load_checkpoint, loads_checkpoint, save_checkpoint  # noqa: F401
from .config import ModelConfig  # noqa: F401
from .encoders import ContextTokens, positional_encoding  # noqa: F401
from .registry import load_presets, resolve_model_config  # noqa: F401
from .unet import NoiseModel, build_model, predict_noise  # noqa: F401
