import csv

import numpy as np
import pytest

from src.data_pipeline import Normalizer
from src.diffusion import build_schedule
from src.errors import ConfigError, DimensionError, PlannerNotFound
from src.eval import (
    batch_metrics,
    batch_variance,
    expert_baseline,
    is_feasible,
    mode_count,
    passing_side,
    passing_sides,
    run_benchmark,
    run_guidance_sweep,
    smoothness,
    summarize,
    workspace_path,
)
from src.geometry import Environment, PlanningProblem, SphereObstacle, planar_arm, point_robot
from src.geometry.environment import UNIT_SQUARE
from src.models import build_model, resolve_model_config
from src.schemas import ReportRow
from src.schemas.config import InferenceConfig, PlannerConfig

ROBOT = point_robot()
ENV = Environment(bounds=UNIT_SQUARE, obstacles=(SphereObstacle((0.5, 0.5), 0.1),))
PROBLEM = PlanningProblem(environment=ENV, q_start=(0.1, 0.5), q_goal=(0.9, 0.5))


def _detour(y_mid, horizon=9):
    """Piecewise-linear start -> (0.5, y_mid) -> goal."""
    first = np.linspace(PROBLEM.start, (0.5, y_mid), horizon // 2 + 1)
    second = np.linspace((0.5, y_mid), PROBLEM.goal, horizon // 2 + 1)
    return np.concatenate([first, second[1:]])


ABOVE, FAR_ABOVE, BELOW = _detour(0.8), _detour(0.95), _detour(0.2)
THROUGH = np.linspace(PROBLEM.start, PROBLEM.goal, 9)


def _above(horizon):
    """ABOVE thinned to ``horizon`` waypoints, keeping both endpoints."""
    return ABOVE[np.linspace(0, len(ABOVE) - 1, horizon).round().astype(int)]


def _smoothness_oracle(trajectory):
    total = 0.0
    for i in range(1, len(trajectory) - 1):
        for d in range(trajectory.shape[1]):
            acc = trajectory[i + 1, d] - 2 * trajectory[i, d] + trajectory[i - 1, d]
            total += acc * acc
    return total


def _variance_oracle(batch):
    total = 0.0
    for h in range(batch.shape[1]):
        mean = batch[:, h].mean(axis=0)
        total += sum(float(np.sum((traj[h] - mean) ** 2)) for traj in batch) / len(batch)
    return total


@pytest.mark.parametrize("trajectory", [ABOVE, BELOW, THROUGH, np.random.default_rng(0).random((7, 2))])
def test_smoothness_matches_loop_oracle(trajectory):
    assert smoothness(trajectory) == pytest.approx(_smoothness_oracle(trajectory), rel=1e-12, abs=1e-15)


def test_smoothness_of_evenly_spaced_line_is_zero():
    assert smoothness(THROUGH) == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(DimensionError):
        smoothness(THROUGH[:2])


def test_variance_matches_loop_oracle():
    batch = np.random.default_rng(1).random((5, 6, 2))
    assert batch_variance(batch) == pytest.approx(_variance_oracle(batch), rel=1e-12)
    assert batch_variance(np.repeat(batch[:1], 3, axis=0)) == 0.0


def test_feasibility_checks():
    assert is_feasible(ABOVE, PROBLEM, ROBOT)
    assert not is_feasible(THROUGH, PROBLEM, ROBOT)
    shifted = ABOVE.copy()
    shifted[-1] += 1e-6
    assert not is_feasible(shifted, PROBLEM, ROBOT)
    escaping = _detour(1.2)
    assert not is_feasible(escaping, PROBLEM, ROBOT)
    with pytest.raises(DimensionError):
        is_feasible(ABOVE[:, :1], PROBLEM, ROBOT)


def test_batch_metrics_mixed_batch():
    batch = np.stack([ABOVE, THROUGH, FAR_ABOVE])
    metrics = batch_metrics(batch, PROBLEM, ROBOT, baseline_best_smoothness=0.05)
    assert metrics.success and metrics.n_feasible == 2 and metrics.n_samples == 3
    assert metrics.ftr == pytest.approx(2 / 3)
    assert metrics.best_index == 0
    assert metrics.best_smoothness == pytest.approx(smoothness(ABOVE))
    assert metrics.bsd == pytest.approx((smoothness(ABOVE) - 0.05) / 0.05)
    assert metrics.var == pytest.approx(batch_variance(batch[[0, 2]]))
    assert not metrics.var_flagged and not metrics.bsd_undefined


def test_batch_metrics_degenerate_cases():
    single = batch_metrics(np.stack([ABOVE, THROUGH]), PROBLEM, ROBOT, baseline_best_smoothness=0.0)
    assert single.var_flagged and single.var == 0.0
    assert single.bsd is None and single.bsd_undefined

    none = batch_metrics(np.stack([THROUGH]), PROBLEM, ROBOT, baseline_best_smoothness=1.0)
    assert not none.success and none.ftr == 0.0
    assert none.best_index is None and none.bsd_undefined

    with pytest.raises(DimensionError):
        batch_metrics(np.zeros((0, 9, 2)), PROBLEM, ROBOT)


def test_batch_metrics_counts_unplanned_attempts_as_infeasible():
    partial = batch_metrics(np.stack([ABOVE, FAR_ABOVE]), PROBLEM, ROBOT, n_attempted=4)
    assert partial.n_samples == 4 and partial.n_feasible == 2
    assert partial.ftr == pytest.approx(0.5)
    assert partial.var == pytest.approx(batch_variance(np.stack([ABOVE, FAR_ABOVE])))

    nothing = batch_metrics(np.zeros((0, 9, 2)), PROBLEM, ROBOT, n_attempted=3)
    assert not nothing.success and nothing.ftr == 0.0 and nothing.n_samples == 3
    assert nothing.var_flagged and nothing.bsd_undefined

    with pytest.raises(DimensionError, match="below the batch size"):
        batch_metrics(np.stack([ABOVE, FAR_ABOVE]), PROBLEM, ROBOT, n_attempted=1)


def test_passing_sides():
    center = np.array([0.5, 0.5])
    assert passing_side(ABOVE, center) == -1
    assert passing_side(BELOW, center) == 1
    assert passing_sides(np.stack([ABOVE, FAR_ABOVE]), center) == {-1}
    assert passing_sides(np.stack([ABOVE, BELOW]), center) == {-1, 1}


def test_mode_count_groups_feasible_samples_by_passing_side():
    batch = np.stack([ABOVE, BELOW, FAR_ABOVE, THROUGH])
    modes = mode_count(batch, PROBLEM, ROBOT)
    assert (modes.n_feasible, modes.modes, modes.split_obstacles) == (3, 2, 1)

    one_sided = mode_count(batch, PROBLEM, ROBOT, feasible=np.array([True, False, True, False]))
    assert (one_sided.n_feasible, one_sided.modes, one_sided.split_obstacles) == (2, 1, 0)

    nothing = mode_count(np.stack([THROUGH]), PROBLEM, ROBOT)
    assert (nothing.n_feasible, nothing.modes, nothing.split_obstacles) == (0, 0, 0)


def test_arm_workspace_path_follows_the_tip():
    arm = planar_arm()
    tips = workspace_path(np.array([[0.0, 0.0], [np.pi / 2, 0.0]]), arm)
    np.testing.assert_allclose(tips, [[0.95, 0.5], [0.5, 0.95]], atol=1e-12)
    np.testing.assert_array_equal(workspace_path(ABOVE, ROBOT), ABOVE)


def test_summarize_skips_missing_values():
    rows = [
        ReportRow(problem_id=0, time_s=0.5, success=True, ftr=1.0, bsd=0.2, var=0.1, n_feasible=2, n_samples=2),
        ReportRow(problem_id=1, time_s=1.5, success=False, ftr=0.0, var=0.0, n_feasible=0, n_samples=2),
    ]
    summary = summarize(rows, "diffusion")
    assert summary.problems == 2
    assert summary.metrics["time_s"].mean == pytest.approx(1.0)
    assert summary.metrics["success"].mean == pytest.approx(0.5)
    assert summary.metrics["bsd"].count == 1


def test_expert_baseline_plans_independent_trajectories():
    planner = PlannerConfig(max_iters=2000, shortcut_iters=10)
    batch, seconds = expert_baseline(PROBLEM, ROBOT, 8, 2, planner, seed=0)
    assert batch.shape == (2, 8, 2)
    assert seconds >= 0
    assert all(is_feasible(trajectory, PROBLEM, ROBOT) for trajectory in batch)


def test_run_benchmark_writes_reports(tmp_path):
    config = resolve_model_config("tiny", {"t_train": 10})
    model = build_model(config, seed=0)
    problems = [PROBLEM, PlanningProblem(environment=ENV, q_start=(0.2, 0.1), q_goal=(0.8, 0.9), problem_id=1)]
    inference = InferenceConfig(sampler="ddim", t_inf=5, batch=3, sigma=1.0, window=3)
    report = run_benchmark(
        model,
        problems,
        build_schedule("cosine", 10),
        inference,
        Normalizer.fit(ROBOT),
        ROBOT,
        out_dir=tmp_path,
        seed=2,
        planner=PlannerConfig(max_iters=2000, shortcut_iters=10),
        baseline_batch=2,
        progress=False,
    )
    assert [row.problem_id for row in report.rows] == [0, 1]
    assert all(batch.shape == (3, 8, 2) for batch in report.batches)
    assert all(row.n_samples == 3 for row in report.rows)
    assert len(report.baseline_rows) == 2 and all(row.success for row in report.baseline_rows)

    with report.report_path.open() as fin:
        rows = list(csv.reader(fin))
    assert rows[0] == ["problem_id", "time_s", "success", "ftr", "bsd", "var", "n_feasible"]
    assert len(rows) == 3
    assert (tmp_path / "baseline.csv").exists()


def _tiny_benchmark(out_dir, **kwargs):
    config = resolve_model_config("tiny", {"t_train": 10})
    options = dict(
        out_dir=out_dir,
        seed=2,
        planner=PlannerConfig(max_iters=2000, shortcut_iters=10),
        baseline_batch=4,
        progress=False,
    )
    options.update(kwargs)
    return run_benchmark(
        build_model(config, seed=0),
        [PROBLEM],
        build_schedule("cosine", 10),
        InferenceConfig(sampler="ddim", t_inf=5, batch=3, sigma=1.0, window=3),
        Normalizer.fit(ROBOT),
        ROBOT,
        **options,
    )


def test_baseline_ftr_counts_failed_plans(tmp_path, monkeypatch):
    calls = []

    def every_other_plan_fails(problem, robot, horizon, seed, planner):
        calls.append(seed)
        if len(calls) % 2 == 0:
            raise PlannerNotFound("budget exhausted")
        return _above(horizon)

    monkeypatch.setattr("src.eval.benchmark.plan_expert_trajectory", every_other_plan_fails)
    report = _tiny_benchmark(tmp_path)
    (row,) = report.baseline_rows
    assert len(calls) == 4
    assert row.n_samples == 4 and row.n_feasible == 2
    assert row.ftr == pytest.approx(0.5)
    assert row.success


def test_baseline_with_no_plans_reports_failure(tmp_path, monkeypatch):
    def never_plans(problem, robot, horizon, seed, planner):
        raise PlannerNotFound("budget exhausted")

    monkeypatch.setattr("src.eval.benchmark.plan_expert_trajectory", never_plans)
    report = _tiny_benchmark(tmp_path)
    (row,) = report.baseline_rows
    assert not row.success and row.ftr == 0.0 and row.n_samples == 4
    assert row.bsd_undefined and row.var_flagged
    assert report.rows[0].bsd is None


def _without_time(path):
    with open(path) as fin:
        rows = list(csv.reader(fin))
    column = rows[0].index("time_s")
    return [row[:column] + row[column + 1 :] for row in rows]


def test_same_seed_gives_identical_reports(tmp_path):
    first = _tiny_benchmark(tmp_path / "a", baseline_batch=2)
    second = _tiny_benchmark(tmp_path / "b", baseline_batch=2)
    for a, b in zip(first.batches, second.batches):
        np.testing.assert_array_equal(a, b)
    # wall-clock seconds are the only column allowed to differ
    assert _without_time(first.report_path) == _without_time(second.report_path)
    assert _without_time(first.baseline_path) == _without_time(second.baseline_path)
    assert first.modes_path.read_bytes() == second.modes_path.read_bytes()


def test_benchmark_writes_multimodality_report(tmp_path):
    report = _tiny_benchmark(tmp_path, planner=None)
    with report.modes_path.open() as fin:
        rows = list(csv.reader(fin))
    assert rows[0] == ["problem_id", "n_feasible", "modes", "split_obstacles"]
    (row,) = report.mode_rows
    assert row.n_feasible == report.rows[0].n_feasible
    assert (row.modes == 0) == (row.n_feasible == 0)
    assert report.multimodal_share in (0.0, 1.0)


def test_guidance_sweep_runs_one_benchmark_per_weight(tmp_path, monkeypatch):
    calls = []

    def plan(problem, robot, horizon, seed, planner):
        calls.append(seed)
        return _above(horizon)

    monkeypatch.setattr("src.eval.benchmark.plan_expert_trajectory", plan)
    config = resolve_model_config("tiny", {"t_train": 10})
    sweep = run_guidance_sweep(
        build_model(config, seed=0),
        [PROBLEM],
        build_schedule("cosine", 10),
        InferenceConfig(sampler="ddim", t_inf=5, w=1.5, batch=3, sigma=1.0, window=3),
        Normalizer.fit(ROBOT),
        ROBOT,
        weights=[0.0, 2.0],
        out_dir=tmp_path,
        seed=2,
        planner=PlannerConfig(),
        baseline_batch=2,
        progress=False,
    )
    assert len(calls) == 2
    assert [row.w for row in sweep.rows] == [0.0, 2.0]
    assert sweep.reports[0.0].baseline_rows == sweep.reports[2.0].baseline_rows
    for name in ("w_0", "w_2"):
        assert (tmp_path / name / "report.csv").exists()
        assert (tmp_path / name / "multimodality.csv").exists()
        assert (tmp_path / name / "baseline.csv").exists()
    lines = sweep.path.read_text().splitlines()
    assert lines[0] == "w,problems,time_s,success,ftr,bsd,var,multimodal"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.0", "2.0"]
    assert sweep.rows[1].ftr == pytest.approx(sweep.reports[2.0].rows[0].ftr)


def test_guidance_sweep_rejects_repeated_weights(tmp_path):
    with pytest.raises(ConfigError, match="distinct"):
        _sweep_with_weights(tmp_path, [1.0, 1.0])
    with pytest.raises(ConfigError, match="at least one"):
        _sweep_with_weights(tmp_path, [])


def _sweep_with_weights(out_dir, weights):
    config = resolve_model_config("tiny", {"t_train": 10})
    return run_guidance_sweep(
        build_model(config, seed=0),
        [PROBLEM],
        build_schedule("cosine", 10),
        InferenceConfig(sampler="ddim", t_inf=5, batch=2, sigma=1.0, window=3),
        Normalizer.fit(ROBOT),
        ROBOT,
        weights=weights,
        out_dir=out_dir,
        progress=False,
    )
