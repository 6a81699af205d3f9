"""SVG figures rendered through matplotlib's SVG backend.

Artists carry a ``gid`` (``obstacle-<i>``, ``trajectory-<i>``, ``endpoint-start``/``endpoint-goal``,
``series-<i>``) that the SVG writer emits as the id of the artist's group.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure
from matplotlib.patches import Circle, Rectangle

from ..errors import DimensionError
from ..eval.metrics import workspace_path
from ..geometry import Environment, RobotModel

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
DPI = 96
SVG_RC = {"svg.hashsalt": "campd", "svg.fonttype": "none"}

Series = Tuple[np.ndarray, np.ndarray]


def _figure(size: int) -> Figure:
    return Figure(figsize=(size / DPI, size / DPI), dpi=DPI)


def _svg_text(figure: Figure) -> str:
    buffer = io.BytesIO()
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue().decode("utf-8")


def _workspace(trajectory: np.ndarray, robot: Optional[RobotModel]) -> np.ndarray:
    return trajectory if robot is None else workspace_path(trajectory, robot)


def environment_svg(
    environment: Environment,
    trajectories: Optional[np.ndarray] = None,
    *,
    robot: Optional[RobotModel] = None,
    start: Optional[np.ndarray] = None,
    goal: Optional[np.ndarray] = None,
    size: int = 480,
) -> str:
    """Obstacles as discs, one line per trajectory, start and goal markers.

    ``start``/``goal`` default to the first trajectory's endpoints.
    """
    figure = _figure(size)
    axes = figure.add_axes((0.04, 0.04, 0.92, 0.92))
    lower, upper = environment.lower, environment.upper
    axes.set_xlim(lower[0], upper[0])
    axes.set_ylim(lower[1], upper[1])
    axes.set_aspect("equal")
    axes.add_patch(
        Rectangle(tuple(lower), *(upper - lower), fill=False, edgecolor="#444444", gid="bounds")
    )
    for index, obstacle in enumerate(environment.obstacles):
        axes.add_patch(Circle(obstacle.center, obstacle.radius, facecolor="#bbbbbb", gid=f"obstacle-{index}"))

    batch = None if trajectories is None else np.asarray(trajectories, dtype=np.float64)
    if batch is not None:
        if batch.ndim == 2:
            batch = batch[None]
        if batch.ndim != 3 or batch.shape[-1] != 2:
            raise DimensionError(f"plot: trajectories must be (N, H, 2), got {batch.shape}")
        for index, trajectory in enumerate(batch):
            path = _workspace(trajectory, robot)
            axes.plot(
                path[:, 0],
                path[:, 1],
                color=PALETTE[index % len(PALETTE)],
                linewidth=1.5,
                gid=f"trajectory-{index}",
            )
        if start is None:
            start = batch[0, 0]
        if goal is None:
            goal = batch[0, -1]
    for label, q, colour in (("start", start, "#2ca02c"), ("goal", goal, "#d62728")):
        if q is None:
            continue
        point = _workspace(np.asarray(q, dtype=np.float64)[None], robot)[0]
        axes.plot(
            [point[0]],
            [point[1]],
            marker="o",
            markersize=7,
            linestyle="none",
            color=colour,
            gid=f"endpoint-{label}",
        )
    return _svg_text(figure)


def read_curve_csv(path: str | Path, x_column: Optional[str] = None) -> Dict[str, Series]:
    """Numeric columns of a CSV keyed by name, each against ``x_column`` (default: the first)."""
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise DimensionError(f"{path}: no header row") from exc
    x_name = x_column or str(frame.columns[0])
    if x_name not in frame.columns:
        raise DimensionError(f"{path}: no column {x_name!r} (columns: {list(frame.columns)})")
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    x = numeric[x_name]
    series: Dict[str, Series] = {}
    for name in frame.columns:
        if name == x_name:
            continue
        valid = x.notna() & numeric[name].notna()
        if valid.any():
            series[str(name)] = (x[valid].to_numpy(dtype=np.float64), numeric[name][valid].to_numpy(dtype=np.float64))
    return series


def curve_svg(series: Mapping[str, Series], *, title: str = "", size: int = 480) -> str:
    """Line chart with one line per series; a legend appears once there are several."""
    if not series:
        raise DimensionError("plot: no numeric series to draw")
    figure = _figure(size)
    axes = figure.add_subplot()
    for index, (name, (x, y)) in enumerate(series.items()):
        axes.plot(x, y, color=PALETTE[index % len(PALETTE)], label=name, gid=f"series-{index}")
    if len(series) > 1:
        axes.legend()
    if title:
        axes.set_title(title)
    axes.grid(True, alpha=0.3)
    return _svg_text(figure)


def write_svg(path: str | Path, svg: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8")
    return path
