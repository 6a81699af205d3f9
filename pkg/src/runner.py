"""CLI entry point for the diffusion motion-planning pipeline."""

from __future__ import annotations

import functools
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, TypeVar

import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from .data_pipeline import (
    Dataset,
    context_from_environment,
    load_split,
    read_dataset,
    save_split,
    split_by_environment,
)
from .diffusion import NoiseSchedule, build_schedule
from .errors import CampdError, ConfigError, EnvironmentSamplingError
from .eval import SweepReport, batch_metrics, print_summary, run_benchmark, run_guidance_sweep, sweep_table
from .eval.benchmark import STREAM_SAMPLE
from .geometry import Environment, PlanningProblem, build_robot
from .inference import read_batch, timed_batch, write_batch, write_batch_csv
from .models import NoiseModel, build_model, load_checkpoint, resolve_model_config
from .observability import ExperimentTracker, StageTimer
from .planning import generate_dataset
from .planning.generate import build_environment
from .plotting import curve_svg, environment_svg, read_curve_csv, write_svg
from .schemas.config import DEFAULT_CONFIG_PATH, CampdConfig, load_run_config
from .schemas.manifest import MANIFEST_NAME, RunManifest, version_string, write_manifest
from .seeding import derive_seed
from .training import train_loop
from .workers import resolve_workers

F = TypeVar("F", bound=Callable[..., Any])

app = typer.Typer(help="Context-aware diffusion motion planning: data, training, sampling and evaluation.")
console = Console()
logger = logging.getLogger(__name__)

SPLIT_NAME = "split.json"


class RobotChoice(str, Enum):
    point2d = "point2d"
    arm2 = "arm2"


class SamplerChoice(str, Enum):
    ddpm = "ddpm"
    ddim = "ddim"


CONFIG = typer.Option(None, "--config", help="YAML config, or a manifest.json from an earlier run")
SEED = typer.Option(None, "--seed", help="Master seed")
ROBOT = typer.Option(None, "--robot", help="Robot model")
N_ENVS = typer.Option(None, "--n-envs", help="Number of environments")
HORIZON = typer.Option(None, "--horizon", help="Waypoints per trajectory")
STEPS = typer.Option(None, "--steps", help="Training steps")
BATCH = typer.Option(None, "--batch", help="Trajectories sampled per problem")
SAMPLER = typer.Option(None, "--sampler", help="Reverse sampler")
T_INF = typer.Option(None, "--t-inf", help="Inference steps (ddim may use fewer than t_train)")
GUIDANCE = typer.Option(None, "--w", help="Guidance strength")
P_D = typer.Option(None, "--p-d", help="Context dropout probability")
SIGMA = typer.Option(None, "--sigma", help="Gaussian filter standard deviation, in waypoints")
WINDOW = typer.Option(None, "--window", help="Gaussian filter window (odd)")
DATA = typer.Option(None, "--data", help="Dataset file (defaults to dataset.path)")
CHECKPOINT = typer.Option(..., "--checkpoint", help="Model checkpoint (.campd)")
SPLIT = typer.Option(None, "--split", help="split.json written by train (defaults to the checkpoint's directory)")
WORKERS = typer.Option(None, "--workers", help="Problems benchmarked in parallel (0 = every core; capped by CAMPD_THREADS)")


def _cli_errors(func: F) -> F:
    """Turn library errors into a one-line message and exit status 2."""

    @functools.wraps(func)
    def _wrapped(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (CampdError, ValidationError) as exc:
            message = " ".join(str(exc).split())
            console.print(f"[red]error:[/] {escape(message)}")
            raise typer.Exit(code=2) from exc

    return _wrapped  # type: ignore[return-value]


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")) -> None:
    load_dotenv()
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
    )


def _load(config: Optional[Path], **flags: Any) -> CampdConfig:
    path = config
    if path is None and DEFAULT_CONFIG_PATH.exists():
        path = DEFAULT_CONFIG_PATH
    flags = {k: (v.value if isinstance(v, Enum) else v) for k, v in flags.items()}
    return load_run_config(path, flags)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + "." + MANIFEST_NAME)


def _manifest(
    subcommand: str,
    cfg: CampdConfig | None,
    target: Path,
    *,
    inputs: Dict[str, Path | None] | None = None,
    outputs: Dict[str, Path | None] | None = None,
    seeds: Dict[str, int] | None = None,
) -> Path:
    manifest = RunManifest(
        subcommand=subcommand,
        version=version_string(),
        seeds=seeds or ({"master": cfg.seed} if cfg is not None else {}),
        inputs={k: str(v) for k, v in (inputs or {}).items() if v is not None},
        outputs={k: str(v) for k, v in (outputs or {}).items() if v is not None},
        config=cfg.model_dump(mode="json") if cfg is not None else {},
    )
    return write_manifest(target, manifest)


def _schedule(cfg: CampdConfig, model: NoiseModel | None = None) -> NoiseSchedule:
    diffusion = cfg.diffusion
    if model is not None and model.config.t_train != diffusion.t_train:
        raise ConfigError(
            f"checkpoint was trained with t_train={model.config.t_train} but the config sets "
            f"diffusion.t_train={diffusion.t_train}"
        )
    return build_schedule(
        diffusion.schedule, diffusion.t_train, beta_start=diffusion.beta_start, beta_end=diffusion.beta_end
    )


def _parse_weights(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--guidance-weights expects comma-separated numbers, got {text!r}") from exc


def _print_stages(timer: StageTimer) -> None:
    table = Table(title="Stage timings")
    table.add_column("stage")
    table.add_column("seconds", justify="right")
    for stage, seconds in timer.summary().items():
        table.add_row(stage, f"{seconds:.3f}")
    console.print(table)


def _split_path(split: Optional[Path], checkpoint: Path) -> Path:
    return split if split is not None else checkpoint.parent / SPLIT_NAME


def _test_problems(dataset: Dataset, split_path: Path, per_env: int, limit: Optional[int]) -> List[PlanningProblem]:
    test_ids = load_split(split_path)["test_env_ids"]
    unknown = sorted(set(test_ids) - set(dataset.env_ids()))
    if unknown:
        raise ConfigError(f"{split_path}: test environments {unknown[:5]} are not in the dataset")
    problems: List[PlanningProblem] = []
    for env_id in test_ids:
        problems.extend(dataset.problems([env_id])[:per_env])
    return problems[:limit] if limit is not None else problems


@app.command("gen-env")
@_cli_errors
def gen_env(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Path = typer.Option(Path("data/runs/envs"), "--out", help="Output directory"),
    robot: Optional[RobotChoice] = ROBOT,
    n_envs: Optional[int] = N_ENVS,
) -> None:
    """Sample environments and write one text file per environment."""
    cfg = _load(config, seed=seed, robot=robot, n_envs=n_envs)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for env_id in range(cfg.dataset.n_envs):
        try:
            env = build_environment(env_id, cfg.seed, cfg.environment)
        except EnvironmentSamplingError as exc:
            console.log(f"[yellow]skipped env {env_id}[/]: {escape(str(exc))}")
            continue
        (out / f"env_{env_id:04d}.txt").write_text(env.to_text(cfg.environment.robot), encoding="utf-8")
        written += 1
    _manifest("gen-env", cfg, out / MANIFEST_NAME, outputs={"environments": out})
    console.log(f"[green]Wrote {written} environments[/] -> {out}")


@app.command("gen-data")
@_cli_errors
def gen_data(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = typer.Option(None, "--out", help="Dataset file (defaults to dataset.path)"),
    robot: Optional[RobotChoice] = ROBOT,
    n_envs: Optional[int] = N_ENVS,
    horizon: Optional[int] = HORIZON,
    quiet: bool = typer.Option(False, "--quiet", help="Hide progress bars"),
) -> None:
    """Plan expert trajectories and write the training dataset."""
    cfg = _load(config, seed=seed, robot=robot, n_envs=n_envs, horizon=horizon)
    out = out or Path(cfg.dataset.path)
    timer = StageTimer()
    with timer.stage("generate_dataset"):
        stats = generate_dataset(
            cfg.dataset.n_envs,
            cfg.dataset.trajs_per_problem,
            cfg.dataset.problems_per_env,
            cfg.dataset.horizon,
            cfg.seed,
            out,
            environment=cfg.environment,
            planner=cfg.planner,
            progress=not quiet,
        )
    timer.flush(f"gen-data:{out}")
    _manifest(
        "gen-data",
        cfg,
        _sidecar(out),
        outputs={"dataset": out, "stats": out.with_suffix(".stats.jsonl")},
    )
    table = Table(title="Dataset generation")
    table.add_column("metric")
    table.add_column("value")
    for key, value in stats.to_dict().items():
        table.add_row(key, json.dumps(value) if isinstance(value, dict) else str(value))
    console.print(table)
    console.log(f"[green]Dataset saved[/] {out} ({stats.succeeded} trajectories)")


@app.command()
@_cli_errors
def train(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    data: Optional[Path] = DATA,
    out: Optional[Path] = typer.Option(None, "--out", help="Run directory (defaults to training.out_dir)"),
    steps: Optional[int] = STEPS,
    p_d: Optional[float] = P_D,
    quiet: bool = typer.Option(False, "--quiet", help="Hide progress bars"),
) -> None:
    """Train the noise model on the training environments of a dataset."""
    cfg = _load(config, seed=seed, steps=steps, p_d=p_d)
    data = data or Path(cfg.dataset.path)
    out = out or Path(cfg.training.out_dir)
    timer = StageTimer()
    with timer.stage("load_dataset"):
        dataset = read_dataset(data)
    train_set, test_set = split_by_environment(dataset, cfg.dataset.test_fraction, cfg.seed)
    split_path = save_split(
        out / SPLIT_NAME, train_set, test_set, seed=cfg.seed, test_fraction=cfg.dataset.test_fraction
    )
    model_config = resolve_model_config(
        cfg.model.preset,
        {
            **cfg.model.overrides(),
            "horizon": dataset.horizon,
            "d_q": dataset.d_q,
            "t_train": cfg.diffusion.t_train,
            "context_types": dataset.context_types,
        },
    )
    model = build_model(model_config, seed=derive_seed(cfg.seed, 0))
    console.log(
        f"Training on {len(train_set)} records from {len(train_set.env_ids())} environments "
        f"({len(test_set.env_ids())} held out)"
    )
    training = cfg.training
    with timer.stage("train_loop"):
        result = train_loop(
            train_set,
            model,
            _schedule(cfg),
            steps=training.steps,
            batch_size=training.batch_size,
            lr=training.lr,
            p_d=training.p_d,
            seed=cfg.seed,
            out_dir=out,
            checkpoint_every=training.checkpoint_every,
            progress=not quiet,
        )
    _print_stages(timer)
    timer.flush(f"train:{out}")
    _manifest(
        "train",
        cfg,
        out / MANIFEST_NAME,
        inputs={"dataset": data},
        outputs={"model": result.final_checkpoint, "loss_log": result.loss_log, "split": split_path},
        seeds={"master": cfg.seed, "init": derive_seed(cfg.seed, 0)},
    )
    metrics = {"initial_loss": result.losses[0], "final_loss": result.losses[-1], "steps": training.steps}
    tracker = ExperimentTracker()
    tracker.log(
        run_type="train",
        params={"seed": cfg.seed, "p_d": training.p_d, "lr": training.lr, "model": model_config.model_dump(mode="json")},
        metrics=metrics,
    )
    console.log(
        f"[green]Training complete[/] loss {result.losses[0]:.5f} -> {result.losses[-1]:.5f}; "
        f"model {result.final_checkpoint}"
    )
    best = tracker.best("train", "final_loss")
    if best is not None:
        console.log(f"Lowest logged final loss {best['metrics']['final_loss']:.5f} ({best.get('ts')})")


@app.command()
@_cli_errors
def sample(
    checkpoint: Path = CHECKPOINT,
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    data: Optional[Path] = DATA,
    split: Optional[Path] = SPLIT,
    problem: int = typer.Option(0, "--problem", help="Index into the held-out problems"),
    out: Path = typer.Option(Path("data/runs/sample"), "--out", help="Output directory"),
    sampler: Optional[SamplerChoice] = SAMPLER,
    t_inf: Optional[int] = T_INF,
    w: Optional[float] = GUIDANCE,
    batch: Optional[int] = BATCH,
    sigma: Optional[float] = SIGMA,
    window: Optional[int] = WINDOW,
) -> None:
    """Sample a trajectory batch for one held-out problem."""
    cfg = _load(config, seed=seed, sampler=sampler, t_inf=t_inf, w=w, batch=batch, sigma=sigma, window=window)
    data = data or Path(cfg.dataset.path)
    model = load_checkpoint(checkpoint)
    dataset = read_dataset(data)
    split_path = _split_path(split, checkpoint)
    problems = _test_problems(dataset, split_path, cfg.evaluation.problems_per_env, None)
    if not 0 <= problem < len(problems):
        raise ConfigError(f"--problem {problem} is out of range (0..{len(problems) - 1})")
    chosen = problems[problem]
    sample_seed = derive_seed(cfg.seed, STREAM_SAMPLE, problem)
    trajectories, seconds = timed_batch(
        model,
        chosen,
        context_from_environment(chosen.environment),
        _schedule(cfg, model),
        cfg.inference,
        dataset.normalizer,
        sample_seed,
    )
    out.mkdir(parents=True, exist_ok=True)
    batch_path = write_batch(out / "samples.bin", trajectories)
    csv_path = write_batch_csv(out / "samples.csv", trajectories)
    env_path = out / "environment.txt"
    env_path.write_text(chosen.environment.to_text(dataset.robot.kind), encoding="utf-8")
    _manifest(
        "sample",
        cfg,
        out / MANIFEST_NAME,
        inputs={"checkpoint": checkpoint, "dataset": data, "split": split_path},
        outputs={"batch": batch_path, "csv": csv_path, "environment": env_path},
        seeds={"master": cfg.seed, "sample": sample_seed},
    )
    metrics = batch_metrics(trajectories, chosen, dataset.robot, None, cfg.evaluation.resolution)
    console.log(
        f"[green]Sampled {len(trajectories)} trajectories[/] in {seconds:.3f}s: "
        f"success={metrics.success} ftr={metrics.ftr:.3f} -> {batch_path}"
    )


@app.command("eval")
@_cli_errors
def evaluate(
    checkpoint: Path = CHECKPOINT,
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    data: Optional[Path] = DATA,
    split: Optional[Path] = SPLIT,
    out: Optional[Path] = typer.Option(None, "--out", help="Report directory (defaults to evaluation.out_dir)"),
    sampler: Optional[SamplerChoice] = SAMPLER,
    t_inf: Optional[int] = T_INF,
    w: Optional[float] = GUIDANCE,
    guidance_weights: Optional[str] = typer.Option(
        None, "--guidance-weights", help="Comma-separated guidance strengths to sweep, e.g. 1,1.5,2,5"
    ),
    batch: Optional[int] = BATCH,
    sigma: Optional[float] = SIGMA,
    window: Optional[int] = WINDOW,
    workers: Optional[int] = WORKERS,
    baseline: Optional[bool] = typer.Option(None, "--baseline/--no-baseline", help="Run the expert baseline"),
    quiet: bool = typer.Option(False, "--quiet", help="Hide progress bars"),
) -> None:
    """Benchmark a checkpoint on the held-out environments, optionally sweeping the guidance strength."""
    cfg = _load(
        config,
        seed=seed,
        sampler=sampler,
        t_inf=t_inf,
        w=w,
        batch=batch,
        sigma=sigma,
        window=window,
        workers=workers,
        guidance_weights=_parse_weights(guidance_weights),
    )
    if baseline is not None:
        cfg.evaluation.baseline = baseline
    data = data or Path(cfg.dataset.path)
    out = out or Path(cfg.evaluation.out_dir)
    timer = StageTimer()
    with timer.stage("load"):
        model = load_checkpoint(checkpoint)
        dataset = read_dataset(data)
    split_path = _split_path(split, checkpoint)
    evaluation = cfg.evaluation
    problems = _test_problems(dataset, split_path, evaluation.problems_per_env, evaluation.max_problems)
    if not problems:
        raise ConfigError(f"{split_path}: no held-out problems to evaluate")
    benchmark_args = (model, problems, _schedule(cfg, model), cfg.inference, dataset.normalizer, dataset.robot)
    options: Dict[str, Any] = dict(
        seed=cfg.seed,
        resolution=evaluation.resolution,
        planner=cfg.planner if evaluation.baseline else None,
        baseline_batch=evaluation.baseline_batch,
        workers=resolve_workers(evaluation.workers),
        progress=not quiet,
    )
    sweep: Optional[SweepReport] = None
    with timer.stage("run_benchmark"):
        if evaluation.guidance_weights:
            sweep = run_guidance_sweep(*benchmark_args, weights=evaluation.guidance_weights, out_dir=out, **options)
            reports = list(sweep.reports.items())
        else:
            reports = [(cfg.inference.w, run_benchmark(*benchmark_args, out_dir=out, **options))]
    _print_stages(timer)
    timer.flush(f"eval:{out}")

    tracker = ExperimentTracker()
    outputs: Dict[str, Optional[Path]] = {"sweep": sweep.path if sweep else None}
    for strength, report in reports:
        summaries = [report.summary()]
        if report.experts:
            summaries.append(report.summary(baseline=True))
        report_dir = out if sweep is None else out / f"w_{strength:g}"
        summary_path = report_dir / "summary.json"
        summary_path.write_text(
            json.dumps([s.model_dump(mode="json") for s in summaries], indent=2) + "\n", encoding="utf-8"
        )
        prefix = "" if sweep is None else f"w_{strength:g}/"
        outputs.update(
            {
                f"{prefix}report": report.report_path,
                f"{prefix}baseline": report.baseline_path,
                f"{prefix}multimodality": report.modes_path,
                f"{prefix}summary": summary_path,
            }
        )
        metrics = {name: metric.mean for name, metric in summaries[0].metrics.items() if metric.mean is not None}
        if report.multimodal_share is not None:
            metrics["multimodal"] = report.multimodal_share
        tracker.log(
            run_type="eval",
            params={"seed": cfg.seed, **cfg.inference.model_dump(mode="json"), "w": strength},
            metrics=metrics,
        )
    _manifest(
        "eval",
        cfg,
        out / MANIFEST_NAME,
        inputs={"checkpoint": checkpoint, "dataset": data, "split": split_path},
        outputs=outputs,
    )
    if sweep is None:
        print_summary(reports[0][1], console)
        console.log(f"[green]Report saved[/] {reports[0][1].report_path}")
    else:
        console.print(sweep_table(sweep))
        console.log(f"[green]Sweep saved[/] {sweep.path}")
    best = tracker.best("eval", "ftr", lower_is_better=False)
    if best is not None:
        console.log(f"Best logged eval FTR {best['metrics']['ftr']:.4f} (w={best['params'].get('w')}, {best.get('ts')})")


@app.command()
@_cli_errors
def plot(
    out: Path = typer.Option(..., "--out", help="SVG file to write"),
    env: Optional[Path] = typer.Option(None, "--env", help="Environment text file"),
    batch: Optional[Path] = typer.Option(None, "--batch", help="Trajectory batch (.bin) drawn over the environment"),
    curve: Optional[Path] = typer.Option(None, "--curve", help="CSV log (loss.csv, report.csv) to chart"),
    x_column: Optional[str] = typer.Option(None, "--x", help="CSV column for the x axis (default: first)"),
) -> None:
    """Render an environment with trajectories, or a CSV curve, to SVG."""
    if (env is None) == (curve is None):
        raise ConfigError("plot needs exactly one of --env or --curve")
    if env is not None:
        if not env.exists():
            raise ConfigError(f"environment file not found: {env}")
        environment, robot_kind = Environment.from_text(env.read_text(encoding="utf-8"))
        trajectories = read_batch(batch) if batch is not None else None
        svg = environment_svg(environment, trajectories, robot=build_robot(robot_kind))
        inputs: Dict[str, Path | None] = {"environment": env, "batch": batch}
    else:
        assert curve is not None
        if not curve.exists():
            raise ConfigError(f"CSV file not found: {curve}")
        svg = curve_svg(read_curve_csv(curve, x_column), title=curve.stem)
        inputs = {"curve": curve}
    write_svg(out, svg)
    _manifest("plot", None, _sidecar(out), inputs=inputs, outputs={"svg": out})
    console.log(f"[green]Plot saved[/] {out}")


if __name__ == "__main__":
    app()
