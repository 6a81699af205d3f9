"""Affine maps between physical units and the model's [-1, 1] range."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..errors import ContextTypeError, NormalizationRangeError
from ..geometry import RobotModel
from ..geometry.environment import UNIT_SQUARE, Bounds
from .context import SPHERE_2D, ContextInstance, ContextSet

RANGE_TOLERANCE = 1e-9


def _forward(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return 2.0 * (x - lower) / (upper - lower) - 1.0


def _inverse(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return lower + (x + 1.0) * (upper - lower) / 2.0


@dataclass(frozen=True)
class Normalizer:
    q_lower: Tuple[float, ...]
    q_upper: Tuple[float, ...]
    context_bounds: Dict[int, Tuple[Tuple[float, ...], Tuple[float, ...]]] = field(default_factory=dict)
    tolerance: float = RANGE_TOLERANCE

    @classmethod
    def fit(cls, robot: RobotModel, bounds: Bounds = UNIT_SQUARE, radius_max: float = 0.15) -> "Normalizer":
        """Configurations from joint limits; sphere params from workspace bounds and (0, radius_max]."""
        (x_lo, x_hi), (y_lo, y_hi) = bounds
        return cls(
            q_lower=tuple(float(v) for v in robot.lower),
            q_upper=tuple(float(v) for v in robot.upper),
            context_bounds={SPHERE_2D: ((x_lo, y_lo, 0.0), (x_hi, y_hi, float(radius_max)))},
        )

    def _check(self, what: str, normalized: np.ndarray) -> np.ndarray:
        if normalized.size and (normalized.min() < -1 - self.tolerance or normalized.max() > 1 + self.tolerance):
            raise NormalizationRangeError(
                f"{what} outside the fitted range: normalized values span "
                f"[{normalized.min():.6g}, {normalized.max():.6g}]"
            )
        return normalized

    def normalize_trajectory(self, trajectory: np.ndarray, *, check: bool = True) -> np.ndarray:
        out = _forward(np.asarray(trajectory, dtype=np.float64), np.array(self.q_lower), np.array(self.q_upper))
        return self._check("trajectory", out) if check else out

    def denormalize_trajectory(self, trajectory: np.ndarray) -> np.ndarray:
        return _inverse(np.asarray(trajectory, dtype=np.float64), np.array(self.q_lower), np.array(self.q_upper))

    def _bounds_for(self, type_id: int) -> Tuple[np.ndarray, np.ndarray]:
        if type_id not in self.context_bounds:
            raise ContextTypeError(f"normalizer has no bounds for context type {type_id}")
        lower, upper = self.context_bounds[type_id]
        return np.array(lower, dtype=np.float64), np.array(upper, dtype=np.float64)

    def normalize_context(self, context: ContextSet, *, check: bool = True) -> ContextSet:
        out = []
        for instance in context:
            params = _forward(np.array(instance.params), *self._bounds_for(instance.type_id))
            if check:
                self._check(f"context type {instance.type_id}", params)
            out.append(ContextInstance(instance.type_id, tuple(float(v) for v in params)))
        return tuple(out)

    def denormalize_context(self, context: ContextSet) -> ContextSet:
        return tuple(
            ContextInstance(
                instance.type_id,
                tuple(float(v) for v in _inverse(np.array(instance.params), *self._bounds_for(instance.type_id))),
            )
            for instance in context
        )
