"""Batch sampling and environment-disjoint splits."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..errors import EmptyDatasetError, SplitError
from .dataset import Dataset, DatasetRecord


def sample_indices(dataset: Dataset, n: int, seed: int | np.random.Generator) -> np.ndarray:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot sample a batch from an empty dataset")
    if n < 1:
        raise ValueError(f"batch size must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.integers(0, len(dataset), size=n)


def sample_batch(dataset: Dataset, n: int, seed: int | np.random.Generator) -> List[DatasetRecord]:
    """Uniform draw with replacement; the dataset is not modified."""
    return [dataset.records[i] for i in sample_indices(dataset, n, seed)]


def split_by_environment(dataset: Dataset, test_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    if not 0 < test_fraction < 1:
        raise SplitError(f"test_fraction must be in (0, 1), got {test_fraction}")
    env_ids = dataset.env_ids()
    if len(env_ids) < 2:
        raise SplitError(f"need at least 2 environments to split, found {len(env_ids)}")
    n_test = min(len(env_ids) - 1, max(1, round(test_fraction * len(env_ids))))
    order = np.random.default_rng(seed).permutation(len(env_ids))
    test_ids = sorted(env_ids[i] for i in order[:n_test])
    train_ids = sorted(set(env_ids) - set(test_ids))
    return dataset.subset(train_ids), dataset.subset(test_ids)


def save_split(path: str | Path, train: Dataset, test: Dataset, *, seed: int, test_fraction: float) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "seed": seed,
        "test_fraction": test_fraction,
        "train_env_ids": train.env_ids(),
        "test_env_ids": test.env_ids(),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def load_split(path: str | Path) -> Dict[str, List[int]]:
    path = Path(path)
    if not path.exists():
        raise SplitError(f"split file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    train_ids, test_ids = set(payload["train_env_ids"]), set(payload["test_env_ids"])
    if train_ids & test_ids:
        raise SplitError(f"split file lists environments in both splits: {sorted(train_ids & test_ids)[:5]}")
    return {"train_env_ids": sorted(train_ids), "test_env_ids": sorted(test_ids)}
