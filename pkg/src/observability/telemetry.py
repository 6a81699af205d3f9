"""JSONL logs shared by run events, stage timings and the experiment history."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JsonlLog:
    """Append-only file of JSON objects, each stamped with ``ts``.

    ``fresh=True`` truncates the file so a rerun into the same directory does
    not mix its records with an earlier run's.
    """

    def __init__(self, path: str | Path, *, fresh: bool = False) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if fresh:
            self.path.write_text("", encoding="utf-8")

    def append(self, record: Mapping[str, Any]) -> None:
        with self.path.open("a", encoding="utf-8") as fout:
            fout.write(json.dumps({"ts": utc_now(), **record}, default=str) + "\n")

    def read(self) -> List[Dict[str, Any]]:
        if not self.path.exists():
            return []
        lines = self.path.read_text(encoding="utf-8").splitlines()
        return [json.loads(line) for line in lines if line.strip()]


class TelemetryLogger(JsonlLog):
    """Labelled events: ``{"ts", "label", "payload"}`` per line."""

    def __init__(self, path: str | Path = "data/metrics/events.jsonl", *, fresh: bool = False) -> None:
        super().__init__(path, fresh=fresh)

    def log(self, label: str, payload: Any) -> None:
        self.append({"label": label, "payload": payload})

    def events(self, label: Optional[str] = None) -> List[Any]:
        """Payloads in write order, optionally only those with ``label``."""
        return [entry["payload"] for entry in self.read() if label is None or entry.get("label") == label]
