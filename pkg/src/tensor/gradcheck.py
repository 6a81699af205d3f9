"""Central finite-difference gradient checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .core import Tape, Tensor


@dataclass
class GradCheckResult:
    max_rel_error: float = 0.0
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def relative_error(analytic: float, numeric: float, floor: float = 1e-3) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    build_loss: Callable[[], Tensor],
    params: Sequence[Tensor],
    *,
    step: float = 1e-4,
    rtol: float = 1e-4,
    entries_per_param: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckResult:
    """Compare tape gradients against central differences.

    ``build_loss`` must rebuild the scalar loss from ``params`` on every call.
    """
    rng = rng or np.random.default_rng(0)
    for param in params:
        param.grad = None
    with Tape() as tape:
        loss = build_loss()
    tape.backward(loss)
    result = GradCheckResult()
    for p_idx, param in enumerate(params):
        analytic = param.grad if param.grad is not None else np.zeros_like(param.data)
        flat = param.data.reshape(-1)
        indices = np.arange(flat.size)
        if entries_per_param is not None and entries_per_param < flat.size:
            indices = rng.choice(flat.size, size=entries_per_param, replace=False)
        for i in indices:
            original = flat[i]
            flat[i] = original + step
            plus = build_loss().item()
            flat[i] = original - step
            minus = build_loss().item()
            flat[i] = original
            numeric = (plus - minus) / (2 * step)
            error = relative_error(float(analytic.reshape(-1)[i]), numeric)
            result.max_rel_error = max(result.max_rel_error, error)
            result.checked += 1
            if error > rtol:
                label = param.name or f"param{p_idx}"
                result.failures.append(f"{label}[{i}]: analytic={analytic.reshape(-1)[i]:.6g} numeric={numeric:.6g}")
    return result
