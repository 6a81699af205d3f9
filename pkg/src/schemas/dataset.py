"""Pydantic schemas for the self-describing dataset header."""

from __future__ import annotations

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class ContextTypeEntry(BaseModel):
    type_id: int
    name: str
    dim: int = Field(ge=1)


class ContextBoundsEntry(BaseModel):
    type_id: int
    lower: List[float]
    upper: List[float]


class NormalizerEntry(BaseModel):
    q_lower: List[float]
    q_upper: List[float]
    context: List[ContextBoundsEntry] = Field(default_factory=list)


class ProblemEntry(BaseModel):
    problem_id: int
    q_start: List[float]
    q_goal: List[float]


class EnvironmentEntry(BaseModel):
    env_id: int
    seed: int
    bounds: Tuple[Tuple[float, float], Tuple[float, float]]
    obstacles: List[Tuple[float, float, float]] = Field(default_factory=list)
    problems: List[ProblemEntry] = Field(default_factory=list)


class DatasetHeader(BaseModel):
    model_config = ConfigDict(extra="forbid")

    robot: str
    horizon: int = Field(ge=2)
    d_q: int = Field(ge=1)
    normalizer: NormalizerEntry
    context_types: List[ContextTypeEntry]
    environments: List[EnvironmentEntry] = Field(default_factory=list)
