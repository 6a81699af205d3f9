"""Gaussian post-filter for sampled trajectories."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def gaussian_kernel(sigma: float, window: int) -> np.ndarray:
    if sigma <= 0:
        raise ConfigError(f"sigma must be > 0, got {sigma}")
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"window must be a positive odd integer, got {window}")
    offsets = np.arange(window) - window // 2
    weights = np.exp(-0.5 * (offsets / sigma) ** 2)
    return weights / weights.sum()


def gaussian_filter(
    trajectory: np.ndarray, sigma: float = 2.0, window: int = 7, *, clamp_endpoints: bool = True
) -> np.ndarray:
    """Per-dimension smoothing along the waypoint axis with reflect padding.

    Accepts (H, d_q) or (N, H, d_q). The first and last waypoints are restored
    afterwards unless ``clamp_endpoints`` is False.
    """
    trajectory = np.asarray(trajectory, dtype=np.float64)
    axis = trajectory.ndim - 2
    horizon = trajectory.shape[axis]
    kernel = gaussian_kernel(sigma, window)
    if window > horizon:
        raise ConfigError(f"window ({window}) exceeds trajectory length ({horizon})")
    half = window // 2
    pad = [(0, 0)] * trajectory.ndim
    pad[axis] = (half, half)
    padded = np.pad(trajectory, pad, mode="reflect")
    out = np.zeros_like(trajectory)
    for k, weight in enumerate(kernel):
        out += weight * np.take(padded, np.arange(k, k + horizon), axis=axis)
    if clamp_endpoints:
        index = [slice(None)] * trajectory.ndim
        for position in (0, -1):
            index[axis] = position
            out[tuple(index)] = trajectory[tuple(index)]
    return out
