"""Collision checks for points and capsule links against discs.

Boundaries are closed: touching an obstacle counts as a collision.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionError
from .environment import Environment
from .robots import RobotModel

DEFAULT_RESOLUTION = 0.01


def segment_point_distance(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Distance from points ``p`` to segments ``a``-``b`` (broadcasting over leading dims)."""
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    safe = np.where(denom > 0, denom, 1.0)
    t = np.clip(np.sum((p - a) * ab, axis=-1) / safe, 0.0, 1.0)
    t = np.where(denom > 0, t, 0.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(p - closest, axis=-1)


def configs_in_collision(robot: RobotModel, qs: np.ndarray, env: Environment) -> np.ndarray:
    """Vectorised verdicts for an (n, d_q) stack of configurations."""
    qs = robot.check_dims(np.atleast_2d(np.asarray(qs, dtype=np.float64)))
    lower, upper = env.lower, env.upper
    centers, radii = env.centers, env.radii
    if robot.kind == "point2d":
        outside = np.any((qs < lower) | (qs > upper), axis=-1)
        if not len(radii):
            return outside
        dist = np.linalg.norm(qs[:, None, :] - centers[None, :, :], axis=-1)
        return outside | np.any(dist <= radii[None, :], axis=-1)
    segments = robot.link_segments(qs)
    cap = robot.capsule_radius
    points = segments.reshape(len(qs), -1, 2)
    outside = np.any((points - cap < lower) | (points + cap > upper), axis=(-1, -2))
    if not len(radii):
        return outside
    a = segments[:, :, None, 0, :]
    b = segments[:, :, None, 1, :]
    dist = segment_point_distance(a, b, centers[None, None, :, :])
    return outside | np.any(dist <= radii + cap, axis=(-1, -2))


def config_in_collision(robot: RobotModel, q: np.ndarray, env: Environment) -> bool:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1:
        raise DimensionError(f"config_in_collision: expected a single configuration, got shape {q.shape}")
    return bool(configs_in_collision(robot, q[None, :], env)[0])


def interpolate_segment(q_a: np.ndarray, q_b: np.ndarray, resolution: float) -> np.ndarray:
    """Points along a canonically ordered segment at spacing <= resolution.

    The sub-step count is a power of two so halving the resolution nests the grid.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    q_a = np.asarray(q_a, dtype=np.float64)
    q_b = np.asarray(q_b, dtype=np.float64)
    if tuple(q_b) < tuple(q_a):
        q_a, q_b = q_b, q_a
    length = float(np.linalg.norm(q_b - q_a))
    if length == 0.0:
        return q_a[None, :]
    steps = max(1, 2 ** max(0, math.ceil(math.log2(length / resolution))))
    fractions = np.arange(steps + 1) / steps
    return q_a + fractions[:, None] * (q_b - q_a)


def segment_in_collision(
    robot: RobotModel,
    q_a: np.ndarray,
    q_b: np.ndarray,
    env: Environment,
    resolution: float = DEFAULT_RESOLUTION,
) -> bool:
    q_a = robot.check_dims(q_a)
    q_b = robot.check_dims(q_b)
    return bool(np.any(configs_in_collision(robot, interpolate_segment(q_a, q_b, resolution), env)))


def path_in_collision(
    robot: RobotModel,
    waypoints: np.ndarray,
    env: Environment,
    resolution: float = DEFAULT_RESOLUTION,
) -> bool:
    """True iff any consecutive segment of ``waypoints`` collides."""
    waypoints = robot.check_dims(np.asarray(waypoints, dtype=np.float64))
    if len(waypoints) == 1:
        return config_in_collision(robot, waypoints[0], env)
    dense = np.concatenate(
        [interpolate_segment(waypoints[i], waypoints[i + 1], resolution) for i in range(len(waypoints) - 1)]
    )
    return bool(np.any(configs_in_collision(robot, dense, env)))
