"""Noise schedules and the forward noising process."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import ScheduleError, ShapeError, TimestepError

ScheduleKind = Literal["cosine", "linear"]
COSINE_OFFSET = 0.008
BETA_MIN = 1e-8
BETA_MAX = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step tables; index ``t - 1`` holds the value for step ``t`` (1..T)."""

    kind: str
    T: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    def check_t(self, t: int | np.ndarray, *, allow_zero: bool = False) -> np.ndarray:
        steps = np.asarray(t)
        low = 0 if allow_zero else 1
        if steps.size and (steps.min() < low or steps.max() > self.T):
            raise TimestepError(f"timestep out of range [{low}, {self.T}]: {steps.min()}..{steps.max()}")
        return steps.astype(np.int64)

    def beta(self, t: int) -> float:
        return float(self.betas[self.check_t(t) - 1])

    def alpha(self, t: int) -> float:
        return float(self.alphas[self.check_t(t) - 1])

    def alpha_bar(self, t: int | np.ndarray) -> np.ndarray | float:
        """Cumulative product up to ``t``; ``alpha_bar(0) == 1``."""
        steps = self.check_t(t, allow_zero=True)
        padded = np.concatenate([[1.0], self.alpha_bars])
        out = padded[steps]
        return float(out) if np.ndim(out) == 0 else out


def build_schedule(
    kind: str = "cosine",
    T: int = 25,
    *,
    beta_start: float = 1e-4,
    beta_end: float = 0.2,
    offset: float = COSINE_OFFSET,
) -> NoiseSchedule:
    if T < 1:
        raise ScheduleError(f"T must be >= 1, got {T}")
    if kind == "linear":
        betas = np.linspace(beta_start, beta_end, T, dtype=np.float64)
    elif kind == "cosine":
        steps = np.arange(T + 1, dtype=np.float64)
        f = np.cos(((steps / T) + offset) / (1 + offset) * math.pi / 2) ** 2
        profile = f / f[0]
        betas = 1.0 - profile[1:] / profile[:-1]
    else:
        raise ScheduleError(f"unknown schedule kind {kind!r} (expected cosine or linear)")
    betas = np.clip(betas, BETA_MIN, BETA_MAX)
    if not np.all((betas > 0) & (betas < 1)):
        raise ScheduleError(f"{kind} schedule produced betas outside (0, 1)")
    alphas = 1.0 - betas
    return NoiseSchedule(kind=kind, T=T, betas=betas, alphas=alphas, alpha_bars=np.cumprod(alphas))


def q_sample(tau_0: np.ndarray, t: int | np.ndarray, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """sqrt(abar_t) tau_0 + sqrt(1 - abar_t) eps; ``t`` may be per batch element."""
    tau_0 = np.asarray(tau_0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if tau_0.shape != eps.shape:
        raise ShapeError("q_sample", tau_0.shape, eps.shape)
    abar = np.asarray(schedule.alpha_bar(schedule.check_t(t)), dtype=np.float64)
    abar = abar.reshape(abar.shape + (1,) * (tau_0.ndim - abar.ndim))
    return np.sqrt(abar) * tau_0 + np.sqrt(1.0 - abar) * eps
