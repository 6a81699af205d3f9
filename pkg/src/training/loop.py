"""Training step and loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from ..data_pipeline import Dataset, sample_batch
from ..diffusion import NoiseSchedule
from ..errors import ConfigError, EmptyDatasetError, TrainingDivergedError
from ..models import NoiseModel, save_checkpoint
from ..observability import TelemetryLogger
from ..seeding import make_rng
from ..tensor import Adam, Tape, Tensor
from ..tensor import ops
from .batch import TrainBatch, assemble_batch

logger = logging.getLogger(__name__)

LOSS_HEADER = "step,loss"
STREAM_BATCH = 1


@dataclass
class StepResult:
    step: int
    loss: float
    grad_norm: float


@dataclass
class TrainResult:
    losses: List[float] = field(default_factory=list)
    loss_log: Optional[Path] = None
    checkpoints: List[Path] = field(default_factory=list)
    final_checkpoint: Optional[Path] = None


def batch_loss(model: NoiseModel, batch: TrainBatch) -> Tensor:
    """Mean squared error over every element of the batch."""
    prediction = model(batch.tau_t, batch.contexts, batch.t)
    diff = ops.sub(prediction, Tensor(batch.target))
    return ops.mean(ops.mul(diff, diff))


def train_step(model: NoiseModel, optimizer: Adam, batch: TrainBatch, step: int = 0) -> StepResult:
    with Tape() as tape:
        loss = batch_loss(model, batch)
    value = loss.item()
    if not math.isfinite(value):
        raise TrainingDivergedError(f"step {step}: non-finite loss {value} (t={batch.t.tolist()})")
    optimizer.zero_grad()
    tape.backward(loss)
    grad_norm = optimizer.grad_norm()
    if not math.isfinite(grad_norm):
        raise TrainingDivergedError(
            f"step {step}: non-finite gradient norm (loss={value}, t={batch.t.tolist()})"
        )
    optimizer.step()
    return StepResult(step=step, loss=value, grad_norm=grad_norm)


def train_loop(
    dataset: Dataset,
    model: NoiseModel,
    schedule: NoiseSchedule,
    *,
    steps: int,
    batch_size: int,
    lr: float,
    p_d: float,
    seed: int,
    out_dir: str | Path,
    checkpoint_every: int = 0,
    progress: bool = True,
) -> TrainResult:
    """Fixed step budget; loss CSV per step, checkpoints at cadence, final ``model.campd``."""
    if steps < 1:
        raise ConfigError(f"train_loop: steps must be >= 1, got {steps}")
    if len(dataset) == 0:
        raise EmptyDatasetError("train_loop: dataset has no records")
    out_dir = Path(out_dir)
    checkpoint_dir = out_dir / "checkpoints"
    out_dir.mkdir(parents=True, exist_ok=True)
    telemetry = TelemetryLogger(out_dir / "events.jsonl", fresh=True)
    optimizer = Adam(model.named_parameters(), lr=lr)
    rng: np.random.Generator = make_rng(seed, STREAM_BATCH)
    result = TrainResult(loss_log=out_dir / "loss.csv")
    with result.loss_log.open("w", encoding="utf-8") as log:
        log.write(LOSS_HEADER + "\n")
        for step in tqdm(range(1, steps + 1), desc="train", disable=not progress):
            records = sample_batch(dataset, batch_size, rng)
            batch = assemble_batch(records, schedule, p_d, rng)
            outcome = train_step(model, optimizer, batch, step)
            result.losses.append(outcome.loss)
            log.write(f"{step},{outcome.loss!r}\n")
            if checkpoint_every and step % checkpoint_every == 0:
                path = save_checkpoint(checkpoint_dir / f"step_{step:06d}.campd", model)
                result.checkpoints.append(path)
                telemetry.log("checkpoint", {"step": step, "path": str(path), "loss": outcome.loss})
    result.final_checkpoint = save_checkpoint(out_dir / "model.campd", model)
    telemetry.log(
        "train_complete",
        {"steps": steps, "initial_loss": result.losses[0], "final_loss": result.losses[-1]},
    )
    logger.info("trained %d steps, loss %.5f -> %.5f", steps, result.losses[0], result.losses[-1])
    return result
