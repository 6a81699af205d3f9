"""Configuration, dataset header, manifest and report schemas."""

from .config import CampdConfig, load_run_config  # noqa: F401
from .manifest import RunManifest, version_string, write_manifest  # noqa: F401
from .report import ModeRow, ReportRow, ReportSummary, SweepRow  # noqa: F401
