"""Training batch assembly: context dropout, noising, endpoint fixing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..data_pipeline import EMPTY_CONTEXT, ContextSet, DatasetRecord
from ..diffusion import NoiseSchedule, q_sample
from ..errors import ConfigError, EmptyDatasetError


@dataclass
class TrainBatch:
    tau_0: np.ndarray
    tau_t: np.ndarray
    target: np.ndarray
    t: np.ndarray
    contexts: List[ContextSet]
    dropped: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


def assemble_batch(
    records: Sequence[DatasetRecord], schedule: NoiseSchedule, p_d: float, rng: np.random.Generator
) -> TrainBatch:
    """Per record: drop the context with probability ``p_d``, draw t ~ U{1..T} and noise.

    After noising, the start and goal rows of ``tau_t`` are reset to the clean
    endpoints and the matching rows of the regression target are zeroed.
    """
    if not records:
        raise EmptyDatasetError("assemble_batch: no records")
    if not 0.0 <= p_d <= 1.0:
        raise ConfigError(f"p_d must be in [0, 1], got {p_d}")
    n = len(records)
    dropped = rng.random(n) < p_d
    contexts = [EMPTY_CONTEXT if drop else record.context for drop, record in zip(dropped, records)]
    t = rng.integers(1, schedule.T + 1, size=n)
    tau_0 = np.stack([record.trajectory for record in records])
    eps = rng.standard_normal(tau_0.shape)
    tau_t = q_sample(tau_0, t, eps, schedule)
    tau_t[:, 0] = tau_0[:, 0]
    tau_t[:, -1] = tau_0[:, -1]
    eps[:, 0] = 0.0
    eps[:, -1] = 0.0
    return TrainBatch(tau_0=tau_0, tau_t=tau_t, target=eps, t=t, contexts=contexts, dropped=dropped)
