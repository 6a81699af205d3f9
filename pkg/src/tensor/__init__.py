"""Minimal float64 tensors with reverse-mode differentiation."""

from .core import Tape, Tensor, current_tape, parameter  # noqa: F401
from .ops import primitive_catalog  # noqa: F401
from .optim import Adam, AdamState, adam_step  # noqa: F401
from .serialization import dumps_weights, load_weights, loads_weights, save_weights  # noqa: F401
