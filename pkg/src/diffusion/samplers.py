"""Reverse-diffusion steps and the pluggable sampler registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Protocol, Tuple

import numpy as np

from ..errors import ConfigError, ScheduleError, ShapeError
from .schedule import NoiseSchedule


def ddpm_step(
    tau_t: np.ndarray, eps: np.ndarray, t: int, schedule: NoiseSchedule, rng: Optional[np.random.Generator]
) -> np.ndarray:
    """Posterior mean plus sqrt(beta_t) noise; no noise at t = 1."""
    tau_t = np.asarray(tau_t, dtype=np.float64)
    if tau_t.shape != np.shape(eps):
        raise ShapeError("ddpm_step", tau_t.shape, np.shape(eps))
    beta, alpha, abar = schedule.beta(t), schedule.alpha(t), schedule.alpha_bar(t)
    mean = (tau_t - beta / np.sqrt(1.0 - abar) * eps) / np.sqrt(alpha)
    if t == 1:
        return mean
    if rng is None:
        raise ConfigError("ddpm_step: an rng is required for t > 1")
    return mean + np.sqrt(beta) * rng.standard_normal(tau_t.shape)


def ddim_step(
    tau_t: np.ndarray,
    eps: np.ndarray,
    t: int,
    t_prev: int,
    schedule: NoiseSchedule,
    eta: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    tau_t = np.asarray(tau_t, dtype=np.float64)
    if tau_t.shape != np.shape(eps):
        raise ShapeError("ddim_step", tau_t.shape, np.shape(eps))
    if not 0 <= t_prev < t <= schedule.T:
        raise ScheduleError(f"ddim_step: invalid step pair t={t}, t_prev={t_prev} (T={schedule.T})")
    if not 0.0 <= eta <= 1.0:
        raise ScheduleError(f"ddim_step: eta must be in [0, 1], got {eta}")
    abar_t, abar_prev = schedule.alpha_bar(t), schedule.alpha_bar(t_prev)
    tau_0 = (tau_t - np.sqrt(1.0 - abar_t) * eps) / np.sqrt(abar_t)
    sigma = eta * np.sqrt((1.0 - abar_prev) / (1.0 - abar_t)) * np.sqrt(1.0 - abar_t / abar_prev)
    direction = np.sqrt(max(1.0 - abar_prev - sigma**2, 0.0)) * eps
    out = np.sqrt(abar_prev) * tau_0 + direction
    if sigma > 0:
        if rng is None:
            raise ConfigError("ddim_step: an rng is required when eta > 0")
        out = out + sigma * rng.standard_normal(tau_t.shape)
    return out


class Sampler(Protocol):
    """The f_denoise contract: a step grid and a single reverse update."""

    name: str

    def step_pairs(self, schedule: NoiseSchedule, t_inf: int) -> List[Tuple[int, int]]: ...

    def step(
        self,
        tau_t: np.ndarray,
        eps: np.ndarray,
        t: int,
        t_prev: int,
        schedule: NoiseSchedule,
        rng: np.random.Generator,
    ) -> np.ndarray: ...


@dataclass(frozen=True)
class DDPMSampler:
    name: str = "ddpm"

    def step_pairs(self, schedule: NoiseSchedule, t_inf: int) -> List[Tuple[int, int]]:
        if t_inf != schedule.T:
            raise ConfigError(f"ddpm runs every step: t_inf must equal T ({t_inf} != {schedule.T})")
        return [(t, t - 1) for t in range(schedule.T, 0, -1)]

    def step(self, tau_t, eps, t, t_prev, schedule, rng):  # type: ignore[no-untyped-def]
        return ddpm_step(tau_t, eps, t, schedule, rng)


def ddim_timesteps(T: int, t_inf: int) -> np.ndarray:
    """Evenly spaced, strictly decreasing integer grid from T down to 0."""
    if not 1 <= t_inf <= T:
        raise ConfigError(f"ddim needs 1 <= t_inf <= T, got t_inf={t_inf}, T={T}")
    grid = np.unique(np.round(np.linspace(0, T, t_inf + 1)).astype(np.int64))[::-1]
    return grid


@dataclass(frozen=True)
class DDIMSampler:
    eta: float = 0.0
    name: str = "ddim"

    def step_pairs(self, schedule: NoiseSchedule, t_inf: int) -> List[Tuple[int, int]]:
        grid = ddim_timesteps(schedule.T, t_inf)
        return [(int(a), int(b)) for a, b in zip(grid[:-1], grid[1:])]

    def step(self, tau_t, eps, t, t_prev, schedule, rng):  # type: ignore[no-untyped-def]
        return ddim_step(tau_t, eps, t, t_prev, schedule, self.eta, rng)


SAMPLERS: Dict[str, Callable[..., Sampler]] = {}


def register_sampler(name: str, factory: Callable[..., Sampler]) -> None:
    if name in SAMPLERS:
        raise ConfigError(f"sampler {name!r} is already registered")
    SAMPLERS[name] = factory


register_sampler("ddpm", lambda **_: DDPMSampler())
register_sampler("ddim", lambda eta=0.0, **_: DDIMSampler(eta=eta))


def build_sampler(kind: str, **options: float) -> Sampler:
    if kind not in SAMPLERS:
        raise ConfigError(f"unknown sampler {kind!r} (available: {sorted(SAMPLERS)})")
    return SAMPLERS[kind](**options)
