"""Observability helpers (telemetry, stage timing, experiment tracking)."""

from .experiments import ExperimentTracker  # noqa: F401
from .telemetry import JsonlLog, TelemetryLogger  # noqa: F401
from .timing import StageTimer  # noqa: F401
