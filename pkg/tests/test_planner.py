import json

import numpy as np
import pytest

from src.data_pipeline import read_dataset
from src.errors import PlannerNotFound
from src.geometry import Environment, PlanningProblem, SphereObstacle, path_in_collision, point_robot
from src.geometry.environment import UNIT_SQUARE
from src.planning import generate_dataset, path_length, resample_to_horizon, rrt_connect, shortcut_smooth
from src.planning.rrt import Path as PlannerPath
from src.schemas.config import EnvironmentConfig, PlannerConfig

CENTRAL = Environment(bounds=UNIT_SQUARE, obstacles=(SphereObstacle(center=(0.5, 0.5), radius=0.2),))
WALL = Environment(
    bounds=UNIT_SQUARE,
    obstacles=tuple(SphereObstacle(center=(0.5, y), radius=0.2) for y in (0.15, 0.5, 0.85)),
)


def _problem(env, start=(0.1, 0.5), goal=(0.9, 0.5)):
    return PlanningProblem(environment=env, q_start=start, q_goal=goal)


def test_rrt_connect_finds_collision_free_path_around_obstacle():
    robot = point_robot()
    path = rrt_connect(_problem(CENTRAL), robot, seed=3)
    np.testing.assert_array_equal(path.waypoints[0], [0.1, 0.5])
    np.testing.assert_array_equal(path.waypoints[-1], [0.9, 0.5])
    assert not path_in_collision(robot, path.waypoints, CENTRAL)


def test_rrt_connect_is_deterministic_per_seed():
    robot = point_robot()
    first = rrt_connect(_problem(CENTRAL), robot, seed=11)
    second = rrt_connect(_problem(CENTRAL), robot, seed=11)
    np.testing.assert_array_equal(first.waypoints, second.waypoints)


def test_rrt_connect_reports_disconnected_space():
    with pytest.raises(PlannerNotFound, match="did not connect"):
        rrt_connect(_problem(WALL), point_robot(), max_iters=300, seed=0)


def test_rrt_connect_rejects_colliding_start():
    with pytest.raises(PlannerNotFound, match="in collision"):
        rrt_connect(_problem(CENTRAL, start=(0.5, 0.5)), point_robot())


def test_shortcut_smoothing_never_lengthens_the_path():
    robot = point_robot()
    path = rrt_connect(_problem(CENTRAL), robot, seed=5)
    smoothed = shortcut_smooth(path, robot, CENTRAL, iters=200, seed=1)
    assert smoothed.length <= path.length + 1e-12
    np.testing.assert_array_equal(smoothed.waypoints[0], path.waypoints[0])
    np.testing.assert_array_equal(smoothed.waypoints[-1], path.waypoints[-1])
    assert not path_in_collision(robot, smoothed.waypoints, CENTRAL)


def test_resampling_is_uniform_in_arc_length():
    corner = PlannerPath(waypoints=np.array([[0.0, 0.0], [1 / 3, 0.0], [1 / 3, 2 / 3]]), robot_kind="point2d")
    out = resample_to_horizon(corner, 64)
    assert out.shape == (64, 2)
    np.testing.assert_array_equal(out[0], [0.0, 0.0])
    np.testing.assert_array_equal(out[-1], [1 / 3, 2 / 3])
    arc = out[:, 0] + out[:, 1]
    np.testing.assert_allclose(arc, np.linspace(0.0, 1.0, 64), atol=1e-12)
    assert path_length(out) == pytest.approx(1.0, abs=1e-9)


def test_resampling_a_zero_length_path_repeats_the_configuration():
    out = resample_to_horizon(np.array([[0.25, 0.75], [0.25, 0.75]]), 5)
    np.testing.assert_array_equal(out, np.tile([0.25, 0.75], (5, 1)))
    with pytest.raises(ValueError):
        resample_to_horizon(np.array([[0.0, 0.0], [1.0, 1.0]]), 1)


def _generate(tmp_path, name, workers):
    return generate_dataset(
        3,
        2,
        1,
        8,
        seed=5,
        output_path=tmp_path / name,
        environment=EnvironmentConfig(n_obstacles_max=2),
        planner=PlannerConfig(shortcut_iters=20),
        workers=workers,
        progress=False,
    )


def test_generate_dataset_writes_records_and_stats(tmp_path):
    stats = _generate(tmp_path, "data.campd", workers=1)
    dataset = read_dataset(tmp_path / "data.campd")
    assert stats.attempted == 2 * stats.problems > 0
    assert len(dataset) == stats.succeeded
    assert sum(stats.failures.values()) == stats.attempted - stats.succeeded
    assert dataset.horizon == 8
    assert np.all(np.abs(dataset.trajectories) <= 1.0 + 1e-9)
    robot = dataset.robot
    for record in dataset.records:
        problem = next(p for p in dataset.problems([record.env_id]) if p.problem_id == record.problem_id)
        physical = dataset.normalizer.denormalize_trajectory(record.trajectory)
        np.testing.assert_allclose(physical[0], problem.start, atol=1e-12)
        np.testing.assert_allclose(physical[-1], problem.goal, atol=1e-12)
        assert not path_in_collision(robot, physical, dataset.environment(record.env_id))
    lines = [json.loads(line) for line in (tmp_path / "data.stats.jsonl").read_text().splitlines()]
    assert [entry["label"] for entry in lines] == ["environment"] * 3 + ["generate_dataset"]
    assert lines[-1]["payload"]["records"] == len(dataset)


def test_generate_dataset_is_byte_identical_across_worker_counts(tmp_path):
    _generate(tmp_path, "serial.campd", workers=1)
    _generate(tmp_path, "parallel.campd", workers=2)
    assert (tmp_path / "serial.campd").read_bytes() == (tmp_path / "parallel.campd").read_bytes()
