"""Noise schedules, guidance and reverse samplers."""

from .guidance import GuidanceConfig, cfg_combine  # noqa: F401
from .samplers import (  # noqa: F401
    SAMPLERS,
    DDIMSampler,
    DDPMSampler,
    Sampler,
    build_sampler,
    ddim_step,
    ddim_timesteps,
    ddpm_step,
    register_sampler,
)
from .schedule import NoiseSchedule, build_schedule, q_sample  # noqa: F401
