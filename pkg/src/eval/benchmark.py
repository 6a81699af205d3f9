"""Benchmark harness: timed batches on held-out problems plus an expert baseline."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from ..data_pipeline import Normalizer, context_from_environment
from ..diffusion import NoiseSchedule
from ..errors import ConfigError, DimensionError, PlannerNotFound
from ..geometry import PlanningProblem, RobotModel
from ..inference import timed_batch
from ..models import NoiseModel
from ..planning import plan_expert_trajectory
from ..schemas.config import InferenceConfig, PlannerConfig
from ..schemas.report import (
    CSV_COLUMNS,
    MODE_COLUMNS,
    SWEEP_COLUMNS,
    MetricSummary,
    ModeRow,
    ReportRow,
    ReportSummary,
    SweepRow,
)
from ..seeding import derive_seed
from .metrics import BatchMetrics, batch_metrics, mode_count

logger = logging.getLogger(__name__)

STREAM_SAMPLE = 0
STREAM_BASELINE = 1
SUMMARY_FIELDS = ("time_s", "success", "ftr", "bsd", "var")

R = TypeVar("R")


@dataclass
class ExpertResult:
    row: ReportRow
    best_smoothness: Optional[float]


@dataclass
class BenchmarkReport:
    rows: List[ReportRow] = field(default_factory=list)
    mode_rows: List[ModeRow] = field(default_factory=list)
    experts: List[ExpertResult] = field(default_factory=list)
    batches: List[np.ndarray] = field(default_factory=list)
    report_path: Optional[Path] = None
    baseline_path: Optional[Path] = None
    modes_path: Optional[Path] = None

    @property
    def baseline_rows(self) -> List[ReportRow]:
        return [expert.row for expert in self.experts]

    @property
    def multimodal_share(self) -> Optional[float]:
        """Share of problems whose feasible samples fall into two or more passing signatures."""
        if not self.mode_rows:
            return None
        return sum(row.modes > 1 for row in self.mode_rows) / len(self.mode_rows)

    def summary(self, baseline: bool = False) -> ReportSummary:
        return summarize(self.baseline_rows if baseline else self.rows, "expert" if baseline else "diffusion")


@dataclass
class SweepReport:
    rows: List[SweepRow] = field(default_factory=list)
    reports: Dict[float, BenchmarkReport] = field(default_factory=dict)
    path: Optional[Path] = None


def summarize(rows: Sequence[ReportRow], label: str) -> ReportSummary:
    metrics: Dict[str, MetricSummary] = {}
    for name in SUMMARY_FIELDS:
        values = [float(getattr(row, name)) for row in rows if getattr(row, name) is not None]
        if values:
            metrics[name] = MetricSummary(mean=float(np.mean(values)), std=float(np.std(values)), count=len(values))
        else:
            metrics[name] = MetricSummary()
    return ReportSummary(label=label, problems=len(rows), metrics=metrics)


def expert_baseline(
    problem: PlanningProblem,
    robot: RobotModel,
    horizon: int,
    n_samples: int,
    planner: PlannerConfig,
    seed: int,
) -> Tuple[np.ndarray, float]:
    """Independent expert plans for one problem; returns (successful trajectories, seconds).

    Failed seeds leave no trajectory, so callers score the batch against ``n_samples`` attempts.
    """
    start = time.perf_counter()
    trajectories = []
    for k in range(n_samples):
        try:
            trajectories.append(
                plan_expert_trajectory(problem, robot, horizon, derive_seed(seed, k), planner)
            )
        except PlannerNotFound:
            continue
    elapsed = time.perf_counter() - start
    batch = np.stack(trajectories) if trajectories else np.zeros((0, horizon, robot.d_q))
    return batch, elapsed


def _row(problem_id: int, seconds: float, metrics: BatchMetrics) -> ReportRow:
    return ReportRow(
        problem_id=problem_id,
        time_s=seconds,
        success=metrics.success,
        ftr=metrics.ftr,
        bsd=metrics.bsd,
        var=metrics.var,
        n_feasible=metrics.n_feasible,
        n_samples=metrics.n_samples,
        bsd_undefined=metrics.bsd_undefined,
        var_flagged=metrics.var_flagged,
    )


def _expert_problem(
    index: int,
    problem: PlanningProblem,
    *,
    robot: RobotModel,
    horizon: int,
    planner: PlannerConfig,
    n_samples: int,
    resolution: float,
    seed: int,
) -> ExpertResult:
    expert, seconds = expert_baseline(
        problem, robot, horizon, n_samples, planner, derive_seed(seed, STREAM_BASELINE, index)
    )
    metrics = batch_metrics(expert, problem, robot, None, resolution, n_attempted=max(1, n_samples))
    return ExpertResult(row=_row(index, seconds, metrics), best_smoothness=metrics.best_smoothness)


def _sample_problem(
    index: int,
    problem: PlanningProblem,
    *,
    model: NoiseModel,
    schedule: NoiseSchedule,
    inference: InferenceConfig,
    normalizer: Normalizer,
    robot: RobotModel,
    resolution: float,
    seed: int,
    experts: Optional[Sequence[ExpertResult]],
) -> Tuple[ReportRow, ModeRow, np.ndarray]:
    baseline_best = experts[index].best_smoothness if experts else None
    context = context_from_environment(problem.environment)
    batch, seconds = timed_batch(
        model, problem, context, schedule, inference, normalizer, derive_seed(seed, STREAM_SAMPLE, index)
    )
    metrics = batch_metrics(batch, problem, robot, baseline_best, resolution)
    modes = mode_count(batch, problem, robot, resolution, feasible=metrics.feasible)
    mode_row = ModeRow(
        problem_id=index,
        n_feasible=modes.n_feasible,
        modes=modes.modes,
        split_obstacles=modes.split_obstacles,
    )
    return _row(index, seconds, metrics), mode_row, batch


def _map_problems(
    func: Callable[..., R],
    problems: Sequence[PlanningProblem],
    *,
    workers: int,
    desc: str,
    progress: bool,
    **kwargs: Any,
) -> List[R]:
    """``func(index, problem, **kwargs)`` for every problem, results in problem order."""
    jobs = list(enumerate(problems))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(func, i, p, **kwargs) for i, p in jobs]
            return [f.result() for f in tqdm(futures, desc=desc, disable=not progress)]
    return [func(i, p, **kwargs) for i, p in tqdm(jobs, desc=desc, disable=not progress)]


def run_benchmark(
    model: NoiseModel,
    problems: Sequence[PlanningProblem],
    schedule: NoiseSchedule,
    inference: InferenceConfig,
    normalizer: Normalizer,
    robot: RobotModel,
    *,
    out_dir: str | Path,
    seed: int = 0,
    resolution: float = 0.01,
    planner: Optional[PlannerConfig] = None,
    baseline_batch: Optional[int] = None,
    experts: Optional[Sequence[ExpertResult]] = None,
    workers: int = 1,
    progress: bool = True,
) -> BenchmarkReport:
    """One report row per problem, in problem order.

    ``planner`` enables the expert baseline; ``experts`` reuses the baseline of an earlier run on
    the same problems and seed instead of planning again.
    """
    if experts is None and planner is not None:
        experts = _map_problems(
            _expert_problem,
            problems,
            workers=workers,
            desc="baseline",
            progress=progress,
            robot=robot,
            horizon=model.config.horizon,
            planner=planner,
            n_samples=baseline_batch or inference.batch,
            resolution=resolution,
            seed=seed,
        )
    if experts is not None and len(experts) != len(problems):
        raise DimensionError(f"run_benchmark: {len(experts)} baseline results for {len(problems)} problems")
    results = _map_problems(
        _sample_problem,
        problems,
        workers=workers,
        desc="eval",
        progress=progress,
        model=model,
        schedule=schedule,
        inference=inference,
        normalizer=normalizer,
        robot=robot,
        resolution=resolution,
        seed=seed,
        experts=experts,
    )
    report = BenchmarkReport(experts=list(experts or []))
    for row, mode_row, batch in results:
        report.rows.append(row)
        report.mode_rows.append(mode_row)
        report.batches.append(batch)

    out_dir = Path(out_dir)
    report.report_path = write_rows_csv(out_dir / "report.csv", CSV_COLUMNS, report.rows)
    report.modes_path = write_rows_csv(out_dir / "multimodality.csv", MODE_COLUMNS, report.mode_rows)
    if report.experts:
        report.baseline_path = write_rows_csv(out_dir / "baseline.csv", CSV_COLUMNS, report.baseline_rows)
    logger.info("benchmarked %d problems at w=%s", len(report.rows), inference.w)
    return report


def sweep_row(w: float, report: BenchmarkReport) -> SweepRow:
    summary = report.summary()
    means = {name: summary.metrics[name].mean for name in SUMMARY_FIELDS}
    return SweepRow(w=w, problems=summary.problems, multimodal=report.multimodal_share, **means)


def run_guidance_sweep(
    model: NoiseModel,
    problems: Sequence[PlanningProblem],
    schedule: NoiseSchedule,
    inference: InferenceConfig,
    normalizer: Normalizer,
    robot: RobotModel,
    *,
    weights: Sequence[float],
    out_dir: str | Path,
    **options: Any,
) -> SweepReport:
    """One benchmark per guidance strength under ``out_dir/w_<w>`` plus ``sweep.csv``.

    The expert baseline runs once and is shared by every strength.
    """
    if not weights:
        raise ConfigError("guidance sweep needs at least one weight")
    if len(set(weights)) != len(weights):
        raise ConfigError(f"guidance sweep weights must be distinct, got {list(weights)}")
    out_dir = Path(out_dir)
    sweep = SweepReport()
    experts: Optional[List[ExpertResult]] = None
    for w in weights:
        settings = InferenceConfig.model_validate({**inference.model_dump(), "w": float(w)})
        report = run_benchmark(
            model,
            problems,
            schedule,
            settings,
            normalizer,
            robot,
            out_dir=out_dir / f"w_{w:g}",
            experts=experts,
            **options,
        )
        experts = report.experts or None
        sweep.reports[w] = report
        sweep.rows.append(sweep_row(w, report))
    sweep.path = write_rows_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, sweep.rows)
    return sweep


def write_rows_csv(path: str | Path, columns: Sequence[str], rows: Sequence[Any]) -> Path:
    """Header plus ``row.csv_row()`` per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fout:
        writer = csv.writer(fout)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row.csv_row())
    return path


def _cell(value: Optional[float], std: Optional[float] = None) -> str:
    if value is None:
        return "n/a"
    return f"{value:.4f}" if std is None else f"{value:.4f} ± {std:.4f}"


def summary_table(*summaries: ReportSummary) -> Table:
    table = Table(title="Benchmark summary (mean ± std)")
    table.add_column("method")
    table.add_column("problems")
    for name in SUMMARY_FIELDS:
        table.add_column(name)
    for summary in summaries:
        cells = []
        for name in SUMMARY_FIELDS:
            metric = summary.metrics.get(name)
            cells.append("n/a" if metric is None else _cell(metric.mean, metric.std))
        table.add_row(summary.label, str(summary.problems), *cells)
    return table


def sweep_table(sweep: SweepReport) -> Table:
    table = Table(title="Guidance sweep (problem means)")
    for name in SWEEP_COLUMNS:
        table.add_column(name)
    for row in sweep.rows:
        values = [row.time_s, row.success, row.ftr, row.bsd, row.var, row.multimodal]
        table.add_row(f"{row.w:g}", str(row.problems), *(_cell(v) for v in values))
    return table


def print_summary(report: BenchmarkReport, console: Console | None = None) -> None:
    console = console or Console()
    summaries = [report.summary()]
    if report.experts:
        summaries.append(report.summary(baseline=True))
    console.print(summary_table(*summaries))
    share = report.multimodal_share
    if share is not None:
        console.print(f"Multimodal batches: {share:.2%} of {len(report.mode_rows)} problems")
