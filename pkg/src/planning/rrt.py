"""Bidirectional RRT (RRT-Connect) over the configuration space."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import networkx as nx
import numpy as np

from ..errors import PlannerNotFound
from ..geometry import PlanningProblem, RobotModel, config_in_collision, segment_in_collision
from ..geometry.collision import DEFAULT_RESOLUTION

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Path:
    """Variable-length waypoint sequence; consecutive pairs are segment-collision-free."""

    waypoints: np.ndarray
    robot_kind: str

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def length(self) -> float:
        return path_length(self.waypoints)


def path_length(waypoints: np.ndarray) -> float:
    waypoints = np.asarray(waypoints, dtype=np.float64)
    if len(waypoints) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(waypoints, axis=0), axis=-1).sum())


class _Status(Enum):
    TRAPPED = "trapped"
    ADVANCED = "advanced"
    REACHED = "reached"


class SearchTree:
    """Rooted tree kept as a ``networkx.DiGraph`` (edges point away from the root)."""

    def __init__(self, root: np.ndarray) -> None:
        self.graph = nx.DiGraph()
        self._points = np.empty((64, len(root)))
        self._size = 0
        self.add(root, parent=None)

    def __len__(self) -> int:
        return self._size

    def add(self, q: np.ndarray, parent: int | None) -> int:
        if self._size == len(self._points):
            self._points = np.concatenate([self._points, np.empty_like(self._points)])
        node = self._size
        self._points[node] = q
        self._size += 1
        self.graph.add_node(node, q=np.array(q))
        if parent is not None:
            self.graph.add_edge(parent, node)
        return node

    def config(self, node: int) -> np.ndarray:
        return self._points[node]

    def nearest(self, q: np.ndarray) -> int:
        deltas = self._points[: self._size] - q
        return int(np.argmin(np.einsum("ij,ij->i", deltas, deltas)))

    def branch(self, node: int) -> List[np.ndarray]:
        """Configurations from the root down to ``node``."""
        return [self.graph.nodes[n]["q"] for n in nx.shortest_path(self.graph, 0, node)]


class _Extender:
    def __init__(self, problem: PlanningProblem, robot: RobotModel, step_size: float, resolution: float) -> None:
        self.env = problem.environment
        self.robot = robot
        self.step_size = step_size
        self.resolution = resolution

    def extend(self, tree: SearchTree, target: np.ndarray) -> Tuple[_Status, int]:
        near = tree.nearest(target)
        q_near = tree.config(near)
        delta = target - q_near
        dist = float(np.linalg.norm(delta))
        if dist <= self.step_size:
            q_new, status = target.copy(), _Status.REACHED
        else:
            q_new, status = q_near + delta * (self.step_size / dist), _Status.ADVANCED
        if not self.robot.within_limits(q_new) or segment_in_collision(
            self.robot, q_near, q_new, self.env, self.resolution
        ):
            return _Status.TRAPPED, near
        return status, tree.add(q_new, near)

    def connect(self, tree: SearchTree, target: np.ndarray) -> Tuple[_Status, int]:
        while True:
            status, node = self.extend(tree, target)
            if status is not _Status.ADVANCED:
                return status, node


def rrt_connect(
    problem: PlanningProblem,
    robot: RobotModel,
    step_size: float = 0.05,
    max_iters: int = 5000,
    seed: int = 0,
    *,
    resolution: float = DEFAULT_RESOLUTION,
) -> Path:
    """Grow trees from start and goal until they meet; deterministic given ``seed``."""
    if step_size <= 0:
        raise ValueError(f"step_size must be > 0, got {step_size}")
    start, goal = robot.check_dims(problem.start), robot.check_dims(problem.goal)
    env = problem.environment
    if config_in_collision(robot, start, env) or config_in_collision(robot, goal, env):
        raise PlannerNotFound("start or goal configuration is in collision")
    rng = np.random.default_rng(seed)
    extender = _Extender(problem, robot, step_size, resolution)
    tree_a, tree_b = SearchTree(start), SearchTree(goal)
    a_is_start = True
    for iteration in range(max_iters):
        q_rand = rng.uniform(robot.lower, robot.upper)
        status, node_a = extender.extend(tree_a, q_rand)
        if status is not _Status.TRAPPED:
            status_b, node_b = extender.connect(tree_b, tree_a.config(node_a))
            if status_b is _Status.REACHED:
                branch_a = tree_a.branch(node_a)
                branch_b = tree_b.branch(node_b)[::-1][1:]
                waypoints = np.array(branch_a + branch_b)
                if not a_is_start:
                    waypoints = waypoints[::-1]
                logger.debug(
                    "rrt_connect: connected after %d iterations (%d + %d nodes)",
                    iteration + 1,
                    len(tree_a),
                    len(tree_b),
                )
                return Path(waypoints=np.ascontiguousarray(waypoints), robot_kind=robot.kind)
        tree_a, tree_b = tree_b, tree_a
        a_is_start = not a_is_start
    raise PlannerNotFound(f"rrt_connect: trees did not connect within {max_iters} iterations (seed={seed})")
