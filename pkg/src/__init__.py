"""Context-aware motion planning diffusion (CAMPD) package."""

from .version import __version__  # noqa: F401
