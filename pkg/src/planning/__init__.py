"""Expert planner: RRT-Connect, shortcut smoothing and dataset generation."""

from .generate import GenerationStats, generate_dataset, plan_expert_trajectory  # noqa: F401
from .rrt import Path, path_length, rrt_connect  # noqa: F401
from .smoothing import resample_to_horizon, shortcut_smooth  # noqa: F401
