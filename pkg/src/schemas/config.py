"""Pydantic schemas for run configuration files."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError

DEFAULT_CONFIG_PATH = Path(os.getenv("CAMPD_CONFIG_PATH", "configs/campd.yaml"))
DEFAULT_DDIM_STEPS = 10


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EnvironmentConfig(_Section):
    robot: Literal["point2d", "arm2"] = "point2d"
    n_obstacles_min: int = Field(default=1, ge=0)
    n_obstacles_max: int = Field(default=5, ge=1)
    radius_min: float = Field(default=0.05, gt=0)
    radius_max: float = Field(default=0.15, gt=0)
    clearance: float = Field(default=0.1, ge=0)
    attempt_budget: int = Field(default=1000, ge=1)
    base_keepout: float = Field(default=0.08, ge=0, description="arm2 only: obstacle-free disc around the base")

    @model_validator(mode="after")
    def _ranges(self) -> "EnvironmentConfig":
        if self.n_obstacles_min > self.n_obstacles_max:
            raise ValueError("n_obstacles_min must be <= n_obstacles_max")
        if self.radius_min > self.radius_max:
            raise ValueError("radius_min must be <= radius_max")
        return self

    @property
    def n_obstacles_range(self) -> Tuple[int, int]:
        return (self.n_obstacles_min, self.n_obstacles_max)

    @property
    def radius_range(self) -> Tuple[float, float]:
        return (self.radius_min, self.radius_max)


class PlannerConfig(_Section):
    step_size: float = Field(default=0.05, gt=0)
    max_iters: int = Field(default=5000, ge=1)
    shortcut_iters: int = Field(default=200, ge=0)
    resolution: float = Field(default=0.01, gt=0)
    min_separation: float = Field(default=0.5, ge=0)
    problem_attempts: int = Field(default=1000, ge=1)


class DatasetConfig(_Section):
    path: str = "data/runs/dataset.campd"
    n_envs: int = Field(default=2000, ge=1)
    problems_per_env: int = Field(default=2, ge=1)
    trajs_per_problem: int = Field(default=10, ge=1)
    horizon: int = Field(default=64, ge=2)
    test_fraction: float = Field(default=0.05, gt=0, lt=1)


class ModelSection(_Section):
    """Architecture given by preset name, optionally overridden field by field."""

    preset: Optional[str] = "desk"
    d_z: Optional[int] = Field(default=None, ge=1)
    depth: Optional[int] = Field(default=None, ge=1)
    channels: Optional[Tuple[int, ...]] = None
    n_heads: Optional[int] = Field(default=None, ge=1)
    head_dim: Optional[int] = Field(default=None, ge=1)
    groups: Optional[int] = Field(default=None, ge=1)

    def overrides(self) -> Dict[str, Any]:
        return {k: v for k, v in self.model_dump(exclude={"preset"}).items() if v is not None}


class DiffusionConfig(_Section):
    schedule: Literal["cosine", "linear"] = "cosine"
    t_train: int = Field(default=25, ge=1)
    beta_start: float = Field(default=1e-4, gt=0, lt=1)
    beta_end: float = Field(default=0.2, gt=0, lt=1)


class TrainingConfig(_Section):
    batch_size: int = Field(default=64, ge=1)
    lr: float = Field(default=1e-4, gt=0)
    p_d: float = Field(default=0.33, ge=0, le=1)
    steps: int = Field(default=20000, ge=1)
    checkpoint_every: int = Field(default=1000, ge=0)
    out_dir: str = "data/runs/train"


class InferenceConfig(_Section):
    sampler: Literal["ddpm", "ddim"] = "ddim"
    t_inf: Optional[int] = Field(default=None, ge=1, description="defaults to t_train for ddpm, 10 for ddim")
    w: float = Field(default=1.5, ge=-1)
    batch: int = Field(default=50, ge=1)
    eta: float = Field(default=0.0, ge=0, le=1)
    sigma: float = Field(default=2.0, gt=0)
    window: int = Field(default=7, ge=1)

    @model_validator(mode="after")
    def _odd_window(self) -> "InferenceConfig":
        if self.window % 2 == 0:
            raise ValueError(f"window must be odd, got {self.window}")
        return self


class EvaluationConfig(_Section):
    resolution: float = Field(default=0.01, gt=0)
    problems_per_env: int = Field(default=1, ge=1)
    max_problems: Optional[int] = Field(default=100, ge=1)
    baseline: bool = True
    baseline_batch: Optional[int] = Field(default=None, ge=1)
    out_dir: str = "data/runs/eval"
    workers: int = Field(default=1, ge=0, description="problems benchmarked in parallel; 0 = every core")
    guidance_weights: Optional[List[float]] = Field(
        default=None, min_length=1, description="sweep these guidance strengths instead of inference.w"
    )

    @model_validator(mode="after")
    def _sweep_weights(self) -> "EvaluationConfig":
        weights = self.guidance_weights or []
        if any(w < -1 for w in weights):
            raise ValueError(f"guidance_weights must be >= -1, got {weights}")
        if len(set(weights)) != len(weights):
            raise ValueError(f"guidance_weights must be distinct, got {weights}")
        return self


class CampdConfig(_Section):
    seed: int = Field(default=0, ge=0)
    environment: EnvironmentConfig = Field(default_factory=EnvironmentConfig)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    model: ModelSection = Field(default_factory=ModelSection)
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    inference: InferenceConfig = Field(default_factory=InferenceConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)

    @model_validator(mode="after")
    def _cross_section(self) -> "CampdConfig":
        inference, t_train = self.inference, self.diffusion.t_train
        if inference.t_inf is None:
            inference.t_inf = t_train if inference.sampler == "ddpm" else min(DEFAULT_DDIM_STEPS, t_train)
        if inference.sampler == "ddpm" and inference.t_inf != t_train:
            raise ValueError(f"ddpm requires t_inf == t_train ({inference.t_inf} != {t_train})")
        if inference.t_inf > t_train:
            raise ValueError(f"t_inf ({inference.t_inf}) must not exceed t_train ({t_train})")
        if inference.window > self.dataset.horizon:
            raise ValueError(f"window ({inference.window}) must not exceed horizon ({self.dataset.horizon})")
        return self


# flag name -> (section, field)
FLAG_FIELDS: Dict[str, Tuple[Optional[str], str]] = {
    "seed": (None, "seed"),
    "robot": ("environment", "robot"),
    "n_envs": ("dataset", "n_envs"),
    "horizon": ("dataset", "horizon"),
    "steps": ("training", "steps"),
    "batch": ("inference", "batch"),
    "sampler": ("inference", "sampler"),
    "t_inf": ("inference", "t_inf"),
    "w": ("inference", "w"),
    "p_d": ("training", "p_d"),
    "sigma": ("inference", "sigma"),
    "window": ("inference", "window"),
    "workers": ("evaluation", "workers"),
    "guidance_weights": ("evaluation", "guidance_weights"),
}


def read_config_text(text: str, source: str = "<string>") -> Dict[str, Any]:
    try:
        payload = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}" if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{source}:{where} could not parse config: {problem}") from exc
    if payload is None:
        return {}
    if not isinstance(payload, dict):
        raise ConfigError(f"{source}: top level must be a mapping of sections")
    # a run manifest carries the resolved config under "config"
    if "subcommand" in payload and isinstance(payload.get("config"), dict):
        return payload["config"]
    return payload


def apply_overrides(payload: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in payload.items()}
    for flag, value in overrides.items():
        if value is None:
            continue
        if flag not in FLAG_FIELDS:
            raise ConfigError(f"unknown override {flag!r}")
        section, field = FLAG_FIELDS[flag]
        if section is None:
            merged[field] = value
        else:
            target = merged.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigError(f"section {section!r} must be a mapping")
            target[field] = value
    return merged


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"]) or "<root>"
        if error["type"] == "extra_forbidden":
            parts.append(f"unknown key {location!r}")
        else:
            parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def load_run_config(path: str | Path | None = None, overrides: Optional[Mapping[str, Any]] = None) -> CampdConfig:
    """Read a YAML config (missing path means defaults) and apply flag overrides."""
    payload: Dict[str, Any] = {}
    source = "<defaults>"
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        source = str(path)
        payload = read_config_text(path.read_text(encoding="utf-8"), source)
    payload = apply_overrides(payload, overrides or {})
    try:
        return CampdConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_describe(exc)}") from exc
