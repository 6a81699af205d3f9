"""SVG rendering for environments, sampled batches and training curves."""

from .svg import curve_svg, environment_svg, read_curve_csv, write_svg  # noqa: F401
