"""Metrics and the benchmark harness."""

from .benchmark import (  # noqa: F401
    BenchmarkReport,
    ExpertResult,
    SweepReport,
    expert_baseline,
    print_summary,
    run_benchmark,
    run_guidance_sweep,
    summarize,
    sweep_table,
)
from .metrics import (  # noqa: F401
    BatchMetrics,
    ModeCount,
    batch_metrics,
    batch_variance,
    is_feasible,
    mode_count,
    passing_side,
    passing_sides,
    smoothness,
    workspace_path,
)
