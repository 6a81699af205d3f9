"""Run history for train and eval: one record per invocation."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional

from .telemetry import JsonlLog


class ExperimentTracker(JsonlLog):
    def __init__(self, path: Path | str = Path("data/metrics/experiments.jsonl")) -> None:
        super().__init__(path)

    def log(self, *, run_type: str, params: Dict[str, Any], metrics: Dict[str, Any]) -> None:
        self.append({"run_type": run_type, "params": params, "metrics": metrics})

    def history(self, run_type: Optional[str] = None) -> List[Dict[str, Any]]:
        return [r for r in self.read() if run_type is None or r.get("run_type") == run_type]

    def best(self, run_type: str, metric: str, *, lower_is_better: bool = True) -> Optional[Dict[str, Any]]:
        """The logged run with the best value of ``metric``; runs without it are ignored."""
        scored = [r for r in self.history(run_type) if isinstance(r.get("metrics", {}).get(metric), (int, float))]
        if not scored:
            return None
        pick = min if lower_is_better else max
        return pick(scored, key=lambda r: r["metrics"][metric])
