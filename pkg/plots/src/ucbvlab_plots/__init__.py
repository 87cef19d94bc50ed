"""Figure rendering for ucbvlab experiment CSVs.

The package talks to the simulation side only through its CSV files:
each renderer takes a path, validates the columns against the
documented experiment schema, and writes one image.
"""

from .figures import (
    FIGURE_KINDS,
    EmptyDataError,
    SchemaMismatchError,
    build_figure,
    render,
)

__all__ = [
    "FIGURE_KINDS",
    "EmptyDataError",
    "SchemaMismatchError",
    "build_figure",
    "render",
]
