"""Guided sampling, Gaussian post-filtering and batch files."""

from .io import dumps_batch, loads_batch, read_batch, write_batch, write_batch_csv  # noqa: F401
from .sampling import sample_trajectories, timed_batch  # noqa: F401
from .smoothing import gaussian_filter, gaussian_kernel  # noqa: F401
