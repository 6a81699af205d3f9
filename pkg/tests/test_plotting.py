import numpy as np
import pytest

from src.errors import DimensionError
from src.geometry import Environment, SphereObstacle, planar_arm
from src.geometry.environment import UNIT_SQUARE
from src.plotting import curve_svg, environment_svg, read_curve_csv, write_svg

ENV = Environment(
    bounds=UNIT_SQUARE,
    obstacles=(SphereObstacle((0.5, 0.5), 0.1), SphereObstacle((0.2, 0.7), 0.05)),
)


def test_environment_figure_tags_every_artist():
    batch = np.stack([np.linspace((0.1, 0.1), (0.9, 0.9), 8), np.linspace((0.1, 0.1), (0.9, 0.2), 8)])
    svg = environment_svg(ENV, batch)
    assert svg.count('id="obstacle-') == 2
    assert svg.count('id="trajectory-') == 2
    assert svg.count('id="endpoint-') == 2
    assert 'id="bounds"' in svg


def test_environment_figure_is_reproducible():
    line = np.linspace((0.1, 0.1), (0.9, 0.9), 8)
    assert environment_svg(ENV, line) == environment_svg(ENV, line)


def test_environment_without_trajectories_draws_given_endpoints_only():
    svg = environment_svg(ENV, start=np.array([0.1, 0.1]))
    assert 'id="endpoint-start"' in svg
    assert 'id="endpoint-goal"' not in svg
    assert 'id="trajectory-' not in svg


def test_arm_batches_are_drawn_in_the_workspace():
    angles = np.linspace((0.0, 0.0), (np.pi / 2, 0.0), 6)
    svg = environment_svg(ENV, angles, robot=planar_arm())
    assert svg.count('id="trajectory-') == 1


def test_environment_rejects_wrong_batch_shape():
    with pytest.raises(DimensionError, match="trajectories must be"):
        environment_svg(ENV, np.zeros((2, 5, 3)))


def test_read_curve_csv_skips_blank_cells(tmp_path):
    path = tmp_path / "report.csv"
    path.write_text("problem_id,time_s,bsd\n0,0.5,\n1,0.7,0.25\n")
    series = read_curve_csv(path)
    np.testing.assert_array_equal(series["time_s"][1], [0.5, 0.7])
    np.testing.assert_array_equal(series["bsd"][0], [1.0])
    np.testing.assert_array_equal(series["bsd"][1], [0.25])


def test_read_curve_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DimensionError, match="no header"):
        read_curve_csv(empty)
    loss = tmp_path / "loss.csv"
    loss.write_text("step,loss\n1,0.5\n")
    with pytest.raises(DimensionError, match="no column 'epoch'"):
        read_curve_csv(loss, "epoch")


def test_curve_svg_draws_one_line_per_series(tmp_path):
    series = {"a": (np.arange(3.0), np.ones(3)), "b": (np.arange(3.0), np.zeros(3))}
    path = write_svg(tmp_path / "nested" / "curves.svg", curve_svg(series, title="curves"))
    svg = path.read_text()
    assert svg.count('id="series-') == 2
    assert "curves" in svg
    with pytest.raises(DimensionError):
        curve_svg({})
