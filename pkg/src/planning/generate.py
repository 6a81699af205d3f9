"""Expert dataset generation: sample environments, plan, smooth, resample."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from ..data_pipeline import (
    Dataset,
    DatasetRecord,
    Normalizer,
    build_header,
    context_from_environment,
    environment_entry,
    write_dataset,
)
from ..errors import EnvironmentSamplingError, PlannerNotFound, ProblemSamplingError
from ..geometry import Environment, PlanningProblem, RobotModel, build_robot, path_in_collision, sample_environment
from ..geometry.problems import sample_problem
from ..observability import TelemetryLogger
from ..schemas.config import EnvironmentConfig, PlannerConfig
from ..schemas.dataset import EnvironmentEntry
from ..seeding import derive_seed
from ..workers import resolve_workers
from .rrt import rrt_connect
from .smoothing import resample_to_horizon, shortcut_smooth

logger = logging.getLogger(__name__)

# seed stream ids under (master seed, env index)
STREAM_ENV = 0
STREAM_PROBLEM = 1
STREAM_PLAN = 2


class ResampleCollision(PlannerNotFound):
    """The resampled trajectory cuts a corner through an obstacle."""


@dataclass
class GenerationStats:
    environments: int = 0
    problems: int = 0
    attempted: int = 0
    succeeded: int = 0
    failures: Counter = field(default_factory=Counter)

    @property
    def success_rate(self) -> float:
        return self.succeeded / self.attempted if self.attempted else 0.0

    def merge(self, other: "GenerationStats") -> None:
        self.environments += other.environments
        self.problems += other.problems
        self.attempted += other.attempted
        self.succeeded += other.succeeded
        self.failures.update(other.failures)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "environments": self.environments,
            "problems": self.problems,
            "attempted": self.attempted,
            "succeeded": self.succeeded,
            "success_rate": round(self.success_rate, 4),
            "failures": dict(sorted(self.failures.items())),
        }


@dataclass
class EnvironmentOutcome:
    env_id: int
    environment: Optional[Environment]
    entry: Optional[EnvironmentEntry]
    trajectories: List[Tuple[int, int, np.ndarray]]
    stats: GenerationStats


def build_environment(env_id: int, master_seed: int, config: EnvironmentConfig) -> Environment:
    robot = build_robot(config.robot)
    keepout = [(robot.base, config.base_keepout)] if robot.kind == "arm2" and config.base_keepout > 0 else []
    return sample_environment(
        derive_seed(master_seed, env_id, STREAM_ENV),
        config.n_obstacles_range,
        config.radius_range,
        config.clearance,
        attempt_budget=config.attempt_budget,
        keepout=keepout,
    )


def plan_expert_trajectory(
    problem: PlanningProblem, robot: RobotModel, horizon: int, seed: int, planner: PlannerConfig
) -> np.ndarray:
    """RRT-Connect, then shortcutting, then arc-length resampling to ``horizon`` waypoints."""
    env = problem.environment
    path = rrt_connect(
        problem, robot, planner.step_size, planner.max_iters, seed, resolution=planner.resolution
    )
    path = shortcut_smooth(
        path, robot, env, planner.shortcut_iters, derive_seed(seed, 1), resolution=planner.resolution
    )
    trajectory = resample_to_horizon(path, horizon)
    if path_in_collision(robot, trajectory, env, planner.resolution):
        raise ResampleCollision("resampled trajectory collides")
    return trajectory


def _generate_environment(
    env_id: int,
    *,
    master_seed: int,
    horizon: int,
    problems_per_env: int,
    trajs_per_problem: int,
    environment: EnvironmentConfig,
    planner: PlannerConfig,
) -> EnvironmentOutcome:
    robot = build_robot(environment.robot)
    stats = GenerationStats()
    try:
        env = build_environment(env_id, master_seed, environment)
    except EnvironmentSamplingError as exc:
        logger.info("env %d skipped: %s", env_id, exc)
        stats.failures["environment_sampling"] += 1
        return EnvironmentOutcome(env_id, None, None, [], stats)
    stats.environments = 1
    problems: List[PlanningProblem] = []
    trajectories: List[Tuple[int, int, np.ndarray]] = []
    for problem_id in range(problems_per_env):
        try:
            problem = sample_problem(
                env,
                robot,
                derive_seed(master_seed, env_id, STREAM_PROBLEM, problem_id),
                planner.min_separation,
                attempt_budget=planner.problem_attempts,
                problem_id=problem_id,
            )
        except ProblemSamplingError as exc:
            logger.info("env %d problem %d skipped: %s", env_id, problem_id, exc)
            stats.failures["problem_sampling"] += 1
            continue
        problems.append(problem)
        stats.problems += 1
        for traj_index in range(trajs_per_problem):
            seed = derive_seed(master_seed, env_id, STREAM_PLAN, problem_id, traj_index)
            stats.attempted += 1
            try:
                trajectory = plan_expert_trajectory(problem, robot, horizon, seed, planner)
            except ResampleCollision:
                stats.failures["resample_collision"] += 1
                continue
            except PlannerNotFound as exc:
                logger.info("env %d problem %d seed %d: %s", env_id, problem_id, traj_index, exc)
                stats.failures["not_found"] += 1
                continue
            stats.succeeded += 1
            trajectories.append((problem_id, seed, trajectory))
    return EnvironmentOutcome(env_id, env, environment_entry(env_id, env, problems), trajectories, stats)


def generate_dataset(
    n_envs: int,
    trajs_per_problem: int,
    problems_per_env: int,
    horizon: int,
    seed: int,
    output_path: str | Path,
    *,
    environment: EnvironmentConfig | None = None,
    planner: PlannerConfig | None = None,
    workers: int | None = None,
    stats_path: str | Path | None = None,
    progress: bool = True,
) -> GenerationStats:
    """Write a dataset file plus a JSONL stats sidecar; returns the merged counts.

    Environments are processed in parallel, each on RNG streams derived from
    ``(seed, env index)``, and merged in env-index order.
    """
    for name, value in (("n_envs", n_envs), ("trajs_per_problem", trajs_per_problem), ("problems_per_env", problems_per_env)):
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")
    environment = environment or EnvironmentConfig()
    planner = planner or PlannerConfig()
    robot = build_robot(environment.robot)
    normalizer = Normalizer.fit(robot, radius_max=environment.radius_max)
    output_path = Path(output_path)
    stats_path = Path(stats_path) if stats_path else output_path.with_suffix(".stats.jsonl")
    if stats_path.exists():
        stats_path.unlink()
    telemetry = TelemetryLogger(stats_path, fresh=True)

    job = partial(
        _generate_environment,
        master_seed=seed,
        horizon=horizon,
        problems_per_env=problems_per_env,
        trajs_per_problem=trajs_per_problem,
        environment=environment,
        planner=planner,
    )
    n_workers = min(resolve_workers(workers), n_envs)
    bar = tqdm(total=n_envs, desc="environments", disable=not progress)
    outcomes: List[EnvironmentOutcome] = []
    if n_workers == 1:
        for env_id in range(n_envs):
            outcomes.append(job(env_id))
            bar.update()
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for outcome in pool.map(job, range(n_envs), chunksize=max(1, n_envs // (8 * n_workers))):
                outcomes.append(outcome)
                bar.update()
    bar.close()

    stats = GenerationStats()
    entries: List[EnvironmentEntry] = []
    records: List[DatasetRecord] = []
    for outcome in outcomes:
        stats.merge(outcome.stats)
        telemetry.log("environment", {"env_id": outcome.env_id, **outcome.stats.to_dict()})
        if outcome.entry is None or outcome.environment is None:
            continue
        entries.append(outcome.entry)
        context = normalizer.normalize_context(context_from_environment(outcome.environment))
        for problem_id, traj_seed, trajectory in outcome.trajectories:
            records.append(
                DatasetRecord(
                    trajectory=normalizer.normalize_trajectory(trajectory),
                    context=context,
                    env_id=outcome.env_id,
                    problem_id=problem_id,
                    seed=traj_seed,
                )
            )
    header = build_header(robot, horizon, normalizer, entries)
    write_dataset(output_path, Dataset(header, records))
    telemetry.log("generate_dataset", {"path": str(output_path), "records": len(records), **stats.to_dict()})
    logger.info("wrote %d records from %d environments to %s", len(records), stats.environments, output_path)
    return stats
