"""Start/goal planning problems inside an environment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..errors import ProblemSamplingError
from .collision import configs_in_collision
from .environment import Environment
from .robots import RobotModel


@dataclass(frozen=True)
class PlanningProblem:
    environment: Environment
    q_start: Tuple[float, ...]
    q_goal: Tuple[float, ...]
    problem_id: int = 0

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.q_start, dtype=np.float64)

    @property
    def goal(self) -> np.ndarray:
        return np.asarray(self.q_goal, dtype=np.float64)


class _Rejected(Exception):
    pass


def sample_problem(
    env: Environment,
    robot: RobotModel,
    seed: int,
    min_separation: float = 0.5,
    *,
    attempt_budget: int = 1000,
    problem_id: int = 0,
) -> PlanningProblem:
    """Draw a collision-free start/goal pair at least ``min_separation`` apart."""
    rng = np.random.default_rng(seed)
    lower, upper = robot.lower, robot.upper

    def draw() -> PlanningProblem:
        pair = rng.uniform(lower, upper, size=(2, robot.d_q))
        if np.linalg.norm(pair[1] - pair[0]) < min_separation:
            raise _Rejected("endpoints too close")
        if np.any(configs_in_collision(robot, pair, env)):
            raise _Rejected("endpoint in collision")
        return PlanningProblem(
            environment=env,
            q_start=tuple(float(v) for v in pair[0]),
            q_goal=tuple(float(v) for v in pair[1]),
            problem_id=problem_id,
        )

    retrying = Retrying(
        stop=stop_after_attempt(max(1, attempt_budget)),
        retry=retry_if_exception_type(_Rejected),
        reraise=True,
    )
    try:
        return retrying(draw)
    except (_Rejected, RetryError) as exc:
        raise ProblemSamplingError(
            f"no valid start/goal pair after {attempt_budget} attempts "
            f"(seed={seed}, min_separation={min_separation})"
        ) from exc
