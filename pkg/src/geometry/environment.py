"""Disc obstacles, environments and the procedural environment sampler."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Tuple

import numpy as np
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..errors import EnvironmentSamplingError, SerializationError

logger = logging.getLogger(__name__)

Bounds = Tuple[Tuple[float, float], Tuple[float, float]]
UNIT_SQUARE: Bounds = ((0.0, 1.0), (0.0, 1.0))
TEXT_HEADER = "campd-environment 1"


@dataclass(frozen=True)
class SphereObstacle:
    """A disc (the planar reduction of a sphere) given by centre and radius."""

    center: Tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"obstacle radius must be > 0, got {self.radius}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.center[0], self.center[1], self.radius])


@dataclass(frozen=True)
class Environment:
    bounds: Bounds
    obstacles: Tuple[SphereObstacle, ...]
    seed: int = 0

    @property
    def centers(self) -> np.ndarray:
        return np.array([o.center for o in self.obstacles], dtype=np.float64).reshape(-1, 2)

    @property
    def radii(self) -> np.ndarray:
        return np.array([o.radius for o in self.obstacles], dtype=np.float64)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def permuted(self, order: Sequence[int]) -> "Environment":
        return replace(self, obstacles=tuple(self.obstacles[i] for i in order))

    def to_text(self, robot_kind: str = "point2d") -> str:
        (x_lo, x_hi), (y_lo, y_hi) = self.bounds
        lines = [
            TEXT_HEADER,
            f"robot {robot_kind}",
            f"seed {self.seed}",
            f"bounds {x_lo!r} {x_hi!r} {y_lo!r} {y_hi!r}",
            f"obstacles {len(self.obstacles)}",
        ]
        lines.extend(f"{o.center[0]!r} {o.center[1]!r} {o.radius!r}" for o in self.obstacles)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Tuple["Environment", str]:
        """Parse the text record; returns the environment and its robot kind."""
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines or lines[0] != TEXT_HEADER:
            raise SerializationError("environment file: missing header line")
        header = {}
        for line in lines[1:5]:
            key, _, value = line.partition(" ")
            header[key] = value
        missing = {"robot", "seed", "bounds", "obstacles"} - header.keys()
        if missing:
            raise SerializationError(f"environment file: missing header fields {sorted(missing)}")
        x_lo, x_hi, y_lo, y_hi = (float(v) for v in header["bounds"].split())
        count = int(header["obstacles"])
        body = lines[5:]
        if len(body) != count:
            raise SerializationError(f"environment file: expected {count} obstacle lines, found {len(body)}")
        obstacles = []
        for number, line in enumerate(body, start=6):
            parts = line.split()
            if len(parts) != 3:
                raise SerializationError(f"environment file line {number}: expected 'x y r'")
            x, y, r = (float(p) for p in parts)
            obstacles.append(SphereObstacle(center=(x, y), radius=r))
        env = cls(bounds=((x_lo, x_hi), (y_lo, y_hi)), obstacles=tuple(obstacles), seed=int(header["seed"]))
        return env, header["robot"]


class PlacementRejected(Exception):
    """One rejection-sampling draw violated a placement constraint."""


def surface_gaps(env: Environment) -> np.ndarray:
    """Pairwise surface distances ``|c_i - c_j| - r_i - r_j`` for i < j."""
    centers, radii = env.centers, env.radii
    i, j = np.triu_indices(len(radii), k=1)
    return np.linalg.norm(centers[i] - centers[j], axis=-1) - radii[i] - radii[j]


def sample_environment(
    seed: int,
    n_obstacles_range: Tuple[int, int] = (1, 5),
    radius_range: Tuple[float, float] = (0.05, 0.15),
    clearance: float = 0.1,
    *,
    bounds: Bounds = UNIT_SQUARE,
    attempt_budget: int = 1000,
    keepout: Iterable[Tuple[Tuple[float, float], float]] = (),
) -> Environment:
    """Rejection-sample disc placements with pairwise surface gap >= clearance.

    ``keepout`` discs (centre, radius) must stay clear of every obstacle by the
    same clearance; the arm robot uses one around its base.
    """
    n_lo, n_hi = n_obstacles_range
    r_lo, r_hi = radius_range
    if n_lo < 0 or n_hi < n_lo or r_lo <= 0 or r_hi < r_lo:
        raise EnvironmentSamplingError(
            f"empty sampling range: obstacles={n_obstacles_range} radius={radius_range}"
        )
    if clearance < 0:
        raise EnvironmentSamplingError(f"clearance must be >= 0, got {clearance}")
    rng = np.random.default_rng(seed)
    lower = np.array([lo for lo, _ in bounds])
    upper = np.array([hi for _, hi in bounds])
    zones = [(np.asarray(c, dtype=np.float64), float(r)) for c, r in keepout]
    count = int(rng.integers(n_lo, n_hi + 1))
    placed: list[SphereObstacle] = []

    def draw() -> SphereObstacle:
        radius = float(rng.uniform(r_lo, r_hi))
        center = rng.uniform(lower + radius, upper - radius)
        if np.any(center - radius < lower) or np.any(center + radius > upper):
            raise PlacementRejected("outside bounds")
        for other in placed:
            gap = np.linalg.norm(center - np.asarray(other.center)) - radius - other.radius
            if gap < clearance:
                raise PlacementRejected("too close to another obstacle")
        for zone_center, zone_radius in zones:
            if np.linalg.norm(center - zone_center) - radius - zone_radius < clearance:
                raise PlacementRejected("inside keep-out zone")
        return SphereObstacle(center=(float(center[0]), float(center[1])), radius=radius)

    retrying = Retrying(
        stop=stop_after_attempt(max(1, attempt_budget)),
        retry=retry_if_exception_type(PlacementRejected),
        reraise=True,
    )
    for index in range(count):
        try:
            placed.append(retrying(draw))
        except (PlacementRejected, RetryError) as exc:
            raise EnvironmentSamplingError(
                f"could not place obstacle {index + 1}/{count} within {attempt_budget} attempts (seed={seed})"
            ) from exc
    logger.debug("sampled environment seed=%s with %d obstacles", seed, count)
    return Environment(bounds=bounds, obstacles=tuple(placed), seed=int(seed))
