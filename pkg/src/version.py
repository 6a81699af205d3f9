"""Package version; run manifests fall back to it outside a git checkout."""

__all__ = ["__version__", "FORMAT_VERSION"]

__version__ = "0.1.0"

# bumped when dataset, checkpoint or batch file layouts change
FORMAT_VERSION = 1
