"""Per-stage wall-clock timing."""

from __future__ import annotations

import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List

from .telemetry import JsonlLog


class StageTimer:
    """Time named blocks and collect their durations until ``flush``."""

    def __init__(self, path: Path | str = Path("data/metrics/stages.jsonl")) -> None:
        self.records: List[Dict[str, Any]] = []
        self.path = Path(path)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            duration = time.perf_counter() - start
            self.records.append({"stage": name, "duration_s": round(duration, 6)})

    def summary(self) -> Dict[str, float]:
        totals: Dict[str, float] = {}
        for record in self.records:
            totals[record["stage"]] = totals.get(record["stage"], 0.0) + record["duration_s"]
        return {stage: round(value, 6) for stage, value in totals.items()}

    def flush(self, run_id: str) -> None:
        if not self.records:
            return
        log = JsonlLog(self.path)
        for record in self.records:
            log.append({**record, "run_id": run_id})
        self.records.clear()
