"""Classifier-free guidance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError


@dataclass(frozen=True)
class GuidanceConfig:
    w: float = 1.5

    def __post_init__(self) -> None:
        if not math.isfinite(self.w) or self.w < -1:
            raise ConfigError(f"guidance strength must be finite and >= -1, got {self.w}")


def cfg_combine(eps_cond: np.ndarray, eps_uncond: np.ndarray, w: float) -> np.ndarray:
    """(1 + w) eps_cond - w eps_uncond, evaluated as eps_cond + w (eps_cond - eps_uncond).

    The rearranged form returns ``eps_cond`` exactly when w = 0 or when both
    predictions agree.
    """
    eps_cond = np.asarray(eps_cond, dtype=np.float64)
    eps_uncond = np.asarray(eps_uncond, dtype=np.float64)
    if eps_cond.shape != eps_uncond.shape:
        raise ShapeError("cfg_combine", eps_cond.shape, eps_uncond.shape)
    return eps_cond + w * (eps_cond - eps_uncond)
