"""Figure specifications: what to draw, from which artifact, to which file."""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FIGURE_KINDS = ("density", "fidelity_entropy", "heat")
OUTPUT_FORMATS = ("png", "svg", "pdf")


class FigureConfigError(ValueError):
    """Bad figure specification."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: kind, input artifact, output file, overlay switches.

    ``format`` of None is inferred from the output suffix. The
    effective-temperature overlay defaults to on only for the heat kind,
    which is the only one that uses it.
    """

    input_csv: Path
    figure_kind: str
    output: Path
    format: str | None = None
    overlay_gibbs: bool = True
    overlay_pointer: bool = True
    overlay_efftemp: bool | None = None

    def __post_init__(self) -> None:
        if self.figure_kind not in FIGURE_KINDS:
            raise FigureConfigError(
                f"figure_kind must be one of {FIGURE_KINDS}, got {self.figure_kind!r}"
            )
        fmt = self.format
        if fmt is None:
            fmt = Path(self.output).suffix.lstrip(".").lower()
        if fmt not in OUTPUT_FORMATS:
            raise FigureConfigError(
                f"format must be one of {OUTPUT_FORMATS}, got {fmt!r}"
            )
        object.__setattr__(self, "format", fmt)
        object.__setattr__(self, "input_csv", Path(self.input_csv))
        object.__setattr__(self, "output", Path(self.output))
        if self.overlay_efftemp is None:
            object.__setattr__(self, "overlay_efftemp", self.figure_kind == "heat")


def load_figure_spec(path) -> FigureSpec:
    """Parse a TOML figure spec; paths are resolved against the file's directory."""
    path = Path(path)
    if not path.exists():
        raise FigureConfigError(f"figure spec not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise FigureConfigError(f"malformed figure spec {path}: {exc}") from exc
    for key in ("input_csv", "figure_kind", "output"):
        if key not in raw:
            raise FigureConfigError(f"figure spec {path} is missing {key!r}")
    base = path.parent
    overlays = raw.get("reference_overlays", {})
    if not isinstance(overlays, dict):
        raise FigureConfigError("reference_overlays must be a table of booleans")
    for key, val in overlays.items():
        if key not in ("gibbs", "pointer", "efftemp"):
            raise FigureConfigError(f"unknown overlay switch {key!r}")
        if not isinstance(val, bool):
            raise FigureConfigError(f"overlay switch {key!r} must be a boolean")
    fmt = raw.get("format")
    if fmt is not None and not isinstance(fmt, str):
        raise FigureConfigError(f"format must be a string, got {fmt!r}")
    return FigureSpec(
        input_csv=base / raw["input_csv"],
        figure_kind=raw["figure_kind"],
        output=base / raw["output"],
        format=fmt,
        overlay_gibbs=overlays.get("gibbs", True),
        overlay_pointer=overlays.get("pointer", True),
        overlay_efftemp=overlays.get("efftemp"),
    )
