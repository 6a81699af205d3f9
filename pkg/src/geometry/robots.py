"""Robot models: a planar point and a two-link planar arm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Tuple

import numpy as np

from ..errors import DimensionError

RobotKind = Literal["point2d", "arm2"]


@dataclass(frozen=True)
class RobotModel:
    """Configuration-space description of a robot.

    For ``point2d`` the configuration is the workspace position; for ``arm2``
    it is two joint angles in radians, with the base at ``base``.
    """

    kind: RobotKind
    joint_limits: Tuple[Tuple[float, float], ...]
    link_lengths: Tuple[float, ...] = ()
    capsule_radius: float = 0.0
    base: Tuple[float, float] = (0.5, 0.5)
    d_q: int = field(init=False, default=2)

    def __post_init__(self) -> None:
        if len(self.joint_limits) != self.d_q:
            raise DimensionError(f"{self.kind}: expected {self.d_q} joint limits, got {len(self.joint_limits)}")
        for lo, hi in self.joint_limits:
            if not lo < hi:
                raise DimensionError(f"{self.kind}: joint limit lo={lo} must be < hi={hi}")
        if self.kind == "arm2" and len(self.link_lengths) != 2:
            raise DimensionError("arm2: needs two link lengths")

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.joint_limits])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.joint_limits])

    def within_limits(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        return np.all((q >= self.lower) & (q <= self.upper), axis=-1)

    def check_dims(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if q.shape[-1] != self.d_q:
            raise DimensionError(f"{self.kind}: configuration has dimension {q.shape[-1]}, expected {self.d_q}")
        return q

    def link_segments(self, q: np.ndarray) -> np.ndarray:
        """Forward kinematics: (..., n_links, 2 endpoints, 2 coords)."""
        q = self.check_dims(q)
        if self.kind != "arm2":
            raise DimensionError(f"{self.kind}: has no links")
        base = np.broadcast_to(np.asarray(self.base, dtype=np.float64), q.shape)
        theta1 = q[..., 0]
        theta12 = q[..., 0] + q[..., 1]
        elbow = base + self.link_lengths[0] * np.stack([np.cos(theta1), np.sin(theta1)], axis=-1)
        tip = elbow + self.link_lengths[1] * np.stack([np.cos(theta12), np.sin(theta12)], axis=-1)
        return np.stack([np.stack([base, elbow], axis=-2), np.stack([elbow, tip], axis=-2)], axis=-3)


def point_robot(bounds: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.0, 1.0), (0.0, 1.0))) -> RobotModel:
    return RobotModel(kind="point2d", joint_limits=tuple(tuple(b) for b in bounds))


def planar_arm(
    link_lengths: Tuple[float, float] = (0.25, 0.2),
    capsule_radius: float = 0.02,
    base: Tuple[float, float] = (0.5, 0.5),
) -> RobotModel:
    return RobotModel(
        kind="arm2",
        joint_limits=((-math.pi, math.pi), (-math.pi, math.pi)),
        link_lengths=tuple(link_lengths),
        capsule_radius=capsule_radius,
        base=tuple(base),
    )


def build_robot(kind: str) -> RobotModel:
    if kind == "point2d":
        return point_robot()
    if kind == "arm2":
        return planar_arm()
    raise DimensionError(f"unknown robot kind {kind!r} (expected point2d or arm2)")
