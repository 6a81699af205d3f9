from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from src.data_pipeline import (
    Dataset,
    DatasetRecord,
    Normalizer,
    build_header,
    context_from_environment,
    environment_entry,
    write_dataset,
)
from src.geometry import point_robot, sample_environment, sample_problem


def build_straight_line_dataset(n_envs: int = 3, records_per_env: int = 4, horizon: int = 8, seed: int = 0) -> Dataset:
    """Point-robot dataset whose trajectories are straight start-goal lines."""
    robot = point_robot()
    normalizer = Normalizer.fit(robot, radius_max=0.15)
    entries, records = [], []
    for env_id in range(n_envs):
        env = sample_environment(seed + env_id, (1, 3))
        problem = sample_problem(env, robot, seed + env_id, problem_id=0)
        entries.append(environment_entry(env_id, env, [problem]))
        line = np.linspace(problem.start, problem.goal, horizon)
        context = normalizer.normalize_context(context_from_environment(env))
        for k in range(records_per_env):
            records.append(
                DatasetRecord(
                    trajectory=normalizer.normalize_trajectory(line),
                    context=context,
                    env_id=env_id,
                    problem_id=0,
                    seed=k,
                )
            )
    return Dataset(build_header(robot, horizon, normalizer, entries), records)


@pytest.fixture
def straight_line_dataset() -> Dataset:
    return build_straight_line_dataset()


@pytest.fixture
def dataset_file(tmp_path: Path) -> Callable[..., Path]:
    def _write(name: str = "dataset.campd", **kwargs) -> Path:
        return write_dataset(tmp_path / name, build_straight_line_dataset(**kwargs))

    return _write
