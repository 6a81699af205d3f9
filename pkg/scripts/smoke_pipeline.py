"""Run gen-data -> train -> sample -> eval -> plot on the smoke config."""

from __future__ import annotations

import sys
import time
from pathlib import Path
from typing import List

import typer
from rich.console import Console

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

from src.runner import app as campd  # noqa: E402

app = typer.Typer(help="End-to-end smoke run of the campd pipeline.")
console = Console()


def _stage(name: str, args: List[str]) -> float:
    start = time.perf_counter()
    try:
        campd(args, standalone_mode=False)
    except SystemExit as exc:
        if exc.code:
            raise
    elapsed = time.perf_counter() - start
    console.log(f"[blue]{name}[/] {elapsed:.1f}s")
    return elapsed


@app.command()
def run(
    config: Path = typer.Option(ROOT / "configs" / "smoke.yaml", "--config", exists=True, dir_okay=False),
    out: Path = typer.Option(Path("data/runs/smoke"), "--out", help="Directory for every smoke artifact"),
    budget: float = typer.Option(60.0, "--budget", help="Fail when the whole run takes longer (seconds)"),
) -> None:
    dataset = out / "dataset.campd"
    train_dir = out / "train"
    checkpoint = train_dir / "model.campd"
    common = ["--config", str(config)]
    total = 0.0
    total += _stage("gen-data", ["gen-data", *common, "--out", str(dataset), "--quiet"])
    total += _stage("train", ["train", *common, "--data", str(dataset), "--out", str(train_dir), "--quiet"])
    total += _stage(
        "sample",
        ["sample", *common, "--checkpoint", str(checkpoint), "--data", str(dataset), "--out", str(out / "sample")],
    )
    total += _stage(
        "eval",
        ["eval", *common, "--checkpoint", str(checkpoint), "--data", str(dataset), "--out", str(out / "eval"), "--quiet"],
    )
    total += _stage(
        "plot",
        [
            "plot",
            "--env",
            str(out / "sample" / "environment.txt"),
            "--batch",
            str(out / "sample" / "samples.bin"),
            "--out",
            str(out / "sample" / "samples.svg"),
        ],
    )
    total += _stage("plot loss", ["plot", "--curve", str(train_dir / "loss.csv"), "--out", str(train_dir / "loss.svg")])
    if total > budget:
        console.log(f"[red]Smoke run took {total:.1f}s, over the {budget:.0f}s budget[/]")
        raise typer.Exit(code=1)
    console.log(f"[green]Smoke run complete[/] in {total:.1f}s -> {out}")


if __name__ == "__main__":
    app()
