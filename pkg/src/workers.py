"""Worker-count resolution shared by the parallel stages."""

from __future__ import annotations

import os


def resolve_workers(requested: int | None = None) -> int:
    """``requested`` (or the CPU count), capped by ``CAMPD_THREADS`` when set."""
    count = requested if requested and requested > 0 else (os.cpu_count() or 1)
    cap = os.getenv("CAMPD_THREADS")
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, count)
