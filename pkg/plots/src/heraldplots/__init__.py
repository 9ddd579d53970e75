"""Figure regeneration from heraldgate CSV sweeps.

The package consumes only the CSV files and JSON manifests written by the
heraldgate command line: every table is checksum-verified against its
manifest before use, figures are described by a fixed registry of recipes,
and each render writes the exact plotted arrays to a sidecar JSON so that
figures can be diffed as data instead of pixels.
"""

from .io import (
    ColumnError,
    DataError,
    EmptyDataError,
    ManifestMismatchError,
    SweepTable,
    load_table,
)
from .figures import FIGURES, FigureSpec, figure_spec
from .overlay import OverlayError, OverlayReport, check_overlay
from .render import RenderResult, render

__version__ = "0.1.0"

__all__ = [
    "ColumnError",
    "DataError",
    "EmptyDataError",
    "FIGURES",
    "FigureSpec",
    "ManifestMismatchError",
    "OverlayError",
    "OverlayReport",
    "RenderResult",
    "SweepTable",
    "check_overlay",
    "figure_spec",
    "load_table",
    "render",
]
