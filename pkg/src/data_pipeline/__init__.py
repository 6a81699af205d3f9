"""Normalization, storage and batch sampling of training pairs."""

from .context import (  # noqa: F401
    DEFAULT_CONTEXT_TYPES,
    EMPTY_CONTEXT,
    SPHERE_2D,
    ContextInstance,
    ContextSet,
    check_context,
    context_from_environment,
    registry_dims,
)
from .dataset import Dataset, DatasetRecord, build_header, environment_entry  # noqa: F401
from .normalizer import Normalizer  # noqa: F401
from .sampling import load_split, sample_batch, sample_indices, save_split, split_by_environment  # noqa: F401
from .storage import dumps_dataset, loads_dataset, read_dataset, write_dataset  # noqa: F401
