"""Robots, disc obstacles, collision checks and environment sampling."""

from .collision import (  # noqa: F401
    DEFAULT_RESOLUTION,
    config_in_collision,
    configs_in_collision,
    interpolate_segment,
    path_in_collision,
    segment_in_collision,
)
from .environment import Environment, SphereObstacle, sample_environment, surface_gaps  # noqa: F401
from .problems import PlanningProblem, sample_problem  # noqa: F401
from .robots import RobotModel, build_robot, planar_arm, point_robot  # noqa: F401
