"""In-memory dataset of normalized (trajectory, context) pairs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..geometry import Environment, PlanningProblem, RobotModel, SphereObstacle, build_robot
from ..schemas.dataset import (
    ContextBoundsEntry,
    ContextTypeEntry,
    DatasetHeader,
    EnvironmentEntry,
    NormalizerEntry,
    ProblemEntry,
)
from .context import DEFAULT_CONTEXT_TYPES, ContextSet, ContextType
from .normalizer import Normalizer


@dataclass(frozen=True)
class DatasetRecord:
    trajectory: np.ndarray
    context: ContextSet
    env_id: int
    problem_id: int
    seed: int


class Dataset:
    """Header plus records; read-only once built."""

    def __init__(self, header: DatasetHeader, records: Sequence[DatasetRecord]) -> None:
        self.header = header
        self.records: Tuple[DatasetRecord, ...] = tuple(records)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> DatasetRecord:
        return self.records[index]

    @property
    def horizon(self) -> int:
        return self.header.horizon

    @property
    def d_q(self) -> int:
        return self.header.d_q

    @cached_property
    def robot(self) -> RobotModel:
        return build_robot(self.header.robot)

    @cached_property
    def normalizer(self) -> Normalizer:
        entry = self.header.normalizer
        return Normalizer(
            q_lower=tuple(entry.q_lower),
            q_upper=tuple(entry.q_upper),
            context_bounds={c.type_id: (tuple(c.lower), tuple(c.upper)) for c in entry.context},
        )

    @cached_property
    def context_types(self) -> Dict[int, int]:
        return {entry.type_id: entry.dim for entry in self.header.context_types}

    @cached_property
    def trajectories(self) -> np.ndarray:
        """All normalized trajectories stacked as (N, H, d_q)."""
        if not self.records:
            return np.zeros((0, self.horizon, self.d_q))
        return np.stack([r.trajectory for r in self.records])

    def env_ids(self) -> List[int]:
        return sorted({entry.env_id for entry in self.header.environments})

    def environment(self, env_id: int) -> Environment:
        entry = self._env_entries[env_id]
        return Environment(
            bounds=entry.bounds,
            obstacles=tuple(SphereObstacle(center=(x, y), radius=r) for x, y, r in entry.obstacles),
            seed=entry.seed,
        )

    def problems(self, env_ids: Iterable[int] | None = None) -> List[PlanningProblem]:
        """Stored start/goal problems, ordered by (env_id, problem_id)."""
        selected = self.env_ids() if env_ids is None else sorted(env_ids)
        out = []
        for env_id in selected:
            env = self.environment(env_id)
            for problem in sorted(self._env_entries[env_id].problems, key=lambda p: p.problem_id):
                out.append(
                    PlanningProblem(
                        environment=env,
                        q_start=tuple(problem.q_start),
                        q_goal=tuple(problem.q_goal),
                        problem_id=problem.problem_id,
                    )
                )
        return out

    def subset(self, env_ids: Iterable[int]) -> "Dataset":
        keep = set(env_ids)
        header = self.header.model_copy(
            update={"environments": [e for e in self.header.environments if e.env_id in keep]}
        )
        return Dataset(header, [r for r in self.records if r.env_id in keep])

    @cached_property
    def _env_entries(self) -> Dict[int, EnvironmentEntry]:
        return {entry.env_id: entry for entry in self.header.environments}


def environment_entry(env_id: int, env: Environment, problems: Sequence[PlanningProblem]) -> EnvironmentEntry:
    return EnvironmentEntry(
        env_id=env_id,
        seed=env.seed,
        bounds=env.bounds,
        obstacles=[(o.center[0], o.center[1], o.radius) for o in env.obstacles],
        problems=[
            ProblemEntry(problem_id=p.problem_id, q_start=list(p.q_start), q_goal=list(p.q_goal)) for p in problems
        ],
    )


def build_header(
    robot: RobotModel,
    horizon: int,
    normalizer: Normalizer,
    environments: Sequence[EnvironmentEntry] = (),
    context_types: Dict[int, ContextType] = DEFAULT_CONTEXT_TYPES,
) -> DatasetHeader:
    return DatasetHeader(
        robot=robot.kind,
        horizon=horizon,
        d_q=robot.d_q,
        normalizer=NormalizerEntry(
            q_lower=list(normalizer.q_lower),
            q_upper=list(normalizer.q_upper),
            context=[
                ContextBoundsEntry(type_id=type_id, lower=list(lo), upper=list(hi))
                for type_id, (lo, hi) in sorted(normalizer.context_bounds.items())
            ],
        ),
        context_types=[ContextTypeEntry(type_id=t.type_id, name=t.name, dim=t.dim) for t in context_types.values()],
        environments=list(environments),
    )
