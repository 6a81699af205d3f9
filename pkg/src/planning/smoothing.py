"""Shortcut smoothing and arc-length resampling of expert paths."""

from __future__ import annotations

import numpy as np

from ..geometry import Environment, RobotModel, segment_in_collision
from ..geometry.collision import DEFAULT_RESOLUTION
from .rrt import Path


def shortcut_smooth(
    path: Path,
    robot: RobotModel,
    env: Environment,
    iters: int = 200,
    seed: int = 0,
    *,
    resolution: float = DEFAULT_RESOLUTION,
) -> Path:
    """Replace random vertex-to-vertex sub-paths with straight, collision-free segments.

    Each accepted shortcut removes the intermediate vertices, so by the triangle
    inequality the length never increases.
    """
    rng = np.random.default_rng(seed)
    waypoints = np.asarray(path.waypoints, dtype=np.float64)
    for _ in range(iters):
        if len(waypoints) < 3:
            break
        i, j = sorted(int(v) for v in rng.choice(len(waypoints), size=2, replace=False))
        if j - i < 2:
            continue
        if segment_in_collision(robot, waypoints[i], waypoints[j], env, resolution):
            continue
        waypoints = np.concatenate([waypoints[: i + 1], waypoints[j:]])
    return Path(waypoints=waypoints, robot_kind=path.robot_kind)


def resample_to_horizon(path: Path | np.ndarray, horizon: int) -> np.ndarray:
    """Arc-length-uniform resampling to exactly ``horizon`` waypoints.

    The first and last waypoints are copied from the path bit-exactly. A
    zero-length path yields ``horizon`` copies of its single configuration.
    """
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    waypoints = np.asarray(path.waypoints if isinstance(path, Path) else path, dtype=np.float64)
    seg = np.linalg.norm(np.diff(waypoints, axis=0), axis=-1)
    keep = np.concatenate([[True], seg > 0])
    points = waypoints[keep]
    cumulative = np.concatenate([[0.0], np.cumsum(seg[seg > 0])])
    total = cumulative[-1]
    if total == 0.0:
        return np.repeat(waypoints[:1], horizon, axis=0)
    targets = np.linspace(0.0, total, horizon)
    out = np.stack([np.interp(targets, cumulative, points[:, d]) for d in range(points.shape[1])], axis=-1)
    out[0] = waypoints[0]
    out[-1] = waypoints[-1]
    return out
