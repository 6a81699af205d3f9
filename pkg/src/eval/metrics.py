"""Trajectory feasibility, smoothness and batch metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Set

import numpy as np

from ..errors import DimensionError
from ..geometry import PlanningProblem, RobotModel, path_in_collision
from ..geometry.collision import DEFAULT_RESOLUTION

ENDPOINT_TOLERANCE = 1e-9
SMOOTHNESS_FLOOR = 1e-12


def _check_trajectory(trajectory: np.ndarray, robot: RobotModel) -> np.ndarray:
    trajectory = np.asarray(trajectory, dtype=np.float64)
    if trajectory.ndim != 2 or trajectory.shape[1] != robot.d_q:
        raise DimensionError(f"trajectory shape {trajectory.shape} does not match d_q={robot.d_q}")
    return trajectory


def is_feasible(
    trajectory: np.ndarray,
    problem: PlanningProblem,
    robot: RobotModel,
    resolution: float = DEFAULT_RESOLUTION,
) -> bool:
    """Within joint limits, correct endpoints, and collision-free along every segment."""
    trajectory = _check_trajectory(trajectory, robot)
    if not np.all(robot.within_limits(trajectory)):
        return False
    if np.max(np.abs(trajectory[0] - problem.start)) > ENDPOINT_TOLERANCE:
        return False
    if np.max(np.abs(trajectory[-1] - problem.goal)) > ENDPOINT_TOLERANCE:
        return False
    return not path_in_collision(robot, trajectory, problem.environment, resolution)


def smoothness(trajectory: np.ndarray) -> float:
    """Sum of squared second differences (discrete acceleration energy)."""
    trajectory = np.asarray(trajectory, dtype=np.float64)
    if trajectory.ndim != 2 or trajectory.shape[0] < 3:
        raise DimensionError(f"smoothness needs at least 3 waypoints, got shape {trajectory.shape}")
    second = trajectory[2:] - 2.0 * trajectory[1:-1] + trajectory[:-2]
    return float(np.sum(second * second))


def batch_variance(trajectories: np.ndarray) -> float:
    """Sum over waypoints of the mean squared distance to the batch-mean configuration."""
    trajectories = np.asarray(trajectories, dtype=np.float64)
    if len(trajectories) == 0:
        return 0.0
    centered = trajectories - trajectories.mean(axis=0, keepdims=True)
    return float(np.sum(centered * centered) / len(trajectories))


@dataclass
class BatchMetrics:
    success: bool
    ftr: float
    var: float
    n_feasible: int
    n_samples: int
    best_index: Optional[int]
    best_smoothness: Optional[float]
    bsd: Optional[float]
    bsd_undefined: bool
    var_flagged: bool
    feasible: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def batch_metrics(
    batch: np.ndarray,
    problem: PlanningProblem,
    robot: RobotModel,
    baseline_best_smoothness: Optional[float] = None,
    resolution: float = DEFAULT_RESOLUTION,
    n_attempted: Optional[int] = None,
) -> BatchMetrics:
    """Metrics of one batch.

    ``n_attempted`` counts samples that never produced a trajectory (planner failures) as
    infeasible: FTR and ``n_samples`` use it as the denominator, and ``batch`` may then be empty.
    """
    batch = np.asarray(batch, dtype=np.float64)
    n_samples = len(batch) if n_attempted is None else n_attempted
    if batch.ndim != 3 or n_samples == 0:
        raise DimensionError(f"batch_metrics needs a non-empty (N, H, d_q) batch, got shape {batch.shape}")
    if n_samples < len(batch):
        raise DimensionError(f"batch_metrics: n_attempted={n_samples} is below the batch size {len(batch)}")
    feasible = np.array([is_feasible(trajectory, problem, robot, resolution) for trajectory in batch], dtype=bool)
    n_feasible = int(feasible.sum())
    best_index: Optional[int] = None
    best_value: Optional[float] = None
    for index in np.flatnonzero(feasible):
        value = smoothness(batch[index])
        if best_value is None or value < best_value:
            best_index, best_value = int(index), value
    bsd: Optional[float] = None
    if best_value is not None and baseline_best_smoothness is not None and baseline_best_smoothness > SMOOTHNESS_FLOOR:
        bsd = (best_value - baseline_best_smoothness) / baseline_best_smoothness
    var_flagged = n_feasible <= 1
    return BatchMetrics(
        success=n_feasible > 0,
        ftr=n_feasible / n_samples,
        var=0.0 if var_flagged else batch_variance(batch[feasible]),
        n_feasible=n_feasible,
        n_samples=n_samples,
        best_index=best_index,
        best_smoothness=best_value,
        bsd=bsd,
        bsd_undefined=bsd is None,
        var_flagged=var_flagged,
        feasible=feasible,
    )


def passing_side(trajectory: np.ndarray, center: np.ndarray) -> int:
    """+1 if the path sweeps counter-clockwise around ``center``, -1 if clockwise, 0 if neither."""
    points = np.asarray(trajectory, dtype=np.float64)[:, :2] - np.asarray(center, dtype=np.float64)
    a, b = points[:-1], points[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.einsum("ij,ij->i", a, b)
    swept = float(np.sum(np.arctan2(cross, dot)))
    return int(np.sign(swept))


def passing_sides(batch: Iterable[np.ndarray], center: np.ndarray) -> Set[int]:
    """Distinct passing sides in a batch; two entries mean both sides are represented."""
    return {side for side in (passing_side(trajectory, center) for trajectory in batch) if side != 0}


def workspace_path(trajectory: np.ndarray, robot: RobotModel) -> np.ndarray:
    """Point robots trace their configurations; arms trace the tip position."""
    trajectory = _check_trajectory(trajectory, robot)
    if robot.kind == "point2d":
        return trajectory
    return robot.link_segments(trajectory)[:, -1, 1, :]


@dataclass
class ModeCount:
    n_feasible: int
    modes: int
    split_obstacles: int


def mode_count(
    batch: np.ndarray,
    problem: PlanningProblem,
    robot: RobotModel,
    resolution: float = DEFAULT_RESOLUTION,
    feasible: Optional[np.ndarray] = None,
) -> ModeCount:
    """Distinct passing-side signatures (one side per obstacle) among the feasible samples of a batch.

    An obstacle is split when feasible samples pass it on both sides. ``feasible`` reuses a mask
    from :func:`batch_metrics` instead of re-checking collisions.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if feasible is None:
        feasible = np.array([is_feasible(t, problem, robot, resolution) for t in batch], dtype=bool)
    paths = [workspace_path(t, robot) for t, ok in zip(batch, feasible) if ok]
    centers = problem.environment.centers
    signatures = {tuple(passing_side(path, center) for center in centers) for path in paths}
    split = sum(1 for center in centers if len(passing_sides(paths, center)) == 2)
    return ModeCount(n_feasible=len(paths), modes=len(signatures), split_obstacles=split)
