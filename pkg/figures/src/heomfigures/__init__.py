"""Figure rendering for steady-state sweep artifacts.

Consumes the sweep CSV and its JSON sidecar; contains no physics of its own.
"""
from .artifacts import (
    EXPECTED_COLUMNS,
    MissingOverlayData,
    SchemaMismatch,
    SweepArtifact,
    load_artifact,
)
from .figspec import (
    FIGURE_KINDS,
    OUTPUT_FORMATS,
    FigureConfigError,
    FigureSpec,
    load_figure_spec,
)
from .render import build_figure, render

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_COLUMNS",
    "FIGURE_KINDS",
    "OUTPUT_FORMATS",
    "FigureConfigError",
    "FigureSpec",
    "MissingOverlayData",
    "SchemaMismatch",
    "SweepArtifact",
    "build_figure",
    "load_artifact",
    "load_figure_spec",
    "render",
    "__version__",
]
