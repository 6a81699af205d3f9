"""Training: batch assembly, loss, optimization and checkpointing."""

from .batch import TrainBatch, assemble_batch  # noqa: F401
from .loop import StepResult, TrainResult, batch_loss, train_loop, train_step  # noqa: F401
