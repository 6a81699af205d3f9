"""Helper scripts that drive the ``campd`` CLI."""
