"""Guided reverse diffusion with endpoint clamping."""

from __future__ import annotations

import logging
import time
from typing import Callable, Optional, Tuple

import numpy as np

from ..data_pipeline import EMPTY_CONTEXT, ContextSet, Normalizer
from ..diffusion import NoiseSchedule, build_sampler, cfg_combine
from ..errors import ConfigError
from ..geometry import PlanningProblem
from ..models import NoiseModel
from ..schemas.config import InferenceConfig
from .smoothing import gaussian_filter

logger = logging.getLogger(__name__)

StepHook = Callable[[int, np.ndarray], None]


def _clamp(tau: np.ndarray, start: np.ndarray, goal: np.ndarray) -> np.ndarray:
    tau[:, 0] = start
    tau[:, -1] = goal
    return tau


def sample_trajectories(
    model: NoiseModel,
    problem: PlanningProblem,
    context: ContextSet,
    schedule: NoiseSchedule,
    config: InferenceConfig,
    normalizer: Normalizer,
    seed: int | np.random.Generator,
    *,
    conditional_only: bool = False,
    on_step: Optional[StepHook] = None,
) -> np.ndarray:
    """Sample ``config.batch`` trajectories in physical units, shape (N, H, d_q).

    ``context`` is in physical units. The unconditional pass reuses the same
    network with the empty context. ``on_step(t_prev, tau)`` sees the
    normalized batch after every reverse step.
    """
    if schedule.T != model.config.t_train:
        raise ConfigError(f"schedule has T={schedule.T} but the model was built for t_train={model.config.t_train}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n, horizon, d_q = config.batch, model.config.horizon, model.config.d_q
    start, goal = problem.start, problem.goal
    if start.shape != (d_q,) or goal.shape != (d_q,):
        raise ConfigError(f"problem endpoints have shape {start.shape}, model expects ({d_q},)")
    start_n = normalizer.normalize_trajectory(start)
    goal_n = normalizer.normalize_trajectory(goal)
    context_n = normalizer.normalize_context(context)
    sampler = build_sampler(config.sampler, eta=config.eta)
    t_inf = config.t_inf if config.t_inf is not None else schedule.T

    cond_tokens = model.encode_context([context_n] * n)
    uncond_tokens = None if conditional_only else model.encode_context([EMPTY_CONTEXT] * n)
    tau = _clamp(rng.standard_normal((n, horizon, d_q)), start_n, goal_n)
    for t, t_prev in sampler.step_pairs(schedule, t_inf):
        z_t = model.encode_time(np.full(n, t))
        eps = model.denoise(tau, z_t, cond_tokens).data
        if uncond_tokens is not None:
            eps = cfg_combine(eps, model.denoise(tau, z_t, uncond_tokens).data, config.w)
        tau = _clamp(sampler.step(tau, eps, t, t_prev, schedule, rng), start_n, goal_n)
        if on_step is not None:
            on_step(t_prev, tau)
    tau = gaussian_filter(tau, config.sigma, config.window)
    out = normalizer.denormalize_trajectory(tau)
    return _clamp(out, start, goal)


def timed_batch(
    model: NoiseModel,
    problem: PlanningProblem,
    context: ContextSet,
    schedule: NoiseSchedule,
    config: InferenceConfig,
    normalizer: Normalizer,
    seed: int | np.random.Generator,
) -> Tuple[np.ndarray, float]:
    """Wall-clock seconds of the sampling loop, including context encoding and smoothing."""
    start = time.perf_counter()
    batch = sample_trajectories(model, problem, context, schedule, config, normalizer, seed)
    elapsed = time.perf_counter() - start
    logger.debug("sampled %d trajectories in %.4fs", len(batch), elapsed)
    return batch, elapsed
