"""Rendering of the three figure kinds from sweep artifacts.

Everything drawn comes from the CSV columns or the sidecar overlay blocks.
Output files are deterministic: the writers strip timestamps and version
stamps, and SVG ids are derived from a fixed hash salt.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .artifacts import SweepArtifact, load_artifact
from .figspec import FigureSpec

GIBBS_STYLE = {"color": "tab:red", "linestyle": "--", "linewidth": 1.0}
POINTER_STYLE = {"color": "tab:blue", "linestyle": "--", "linewidth": 1.0}
EFFTEMP_STYLE = {"color": "black", "linestyle": ":", "linewidth": 1.2}

UPPER_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]

# per-format metadata that would otherwise embed timestamps or versions
_STRIP_METADATA = {
    "png": {"Software": None},
    "svg": {"Date": None},
    "pdf": {"CreationDate": None, "Producer": None, "Creator": None},
}


def _set_lambda_axis(ax, grid) -> None:
    ax.set_xlabel("bath coupling")
    if np.all(grid > 0):
        ax.set_xscale("log")


def _axhlines(ax, values, style) -> None:
    for v in np.atleast_1d(np.asarray(values, dtype=float)).ravel():
        ax.axhline(v, **style)


def _density_panels(fig, art: SweepArtifact, spec: FigureSpec) -> None:
    axes = fig.subplots(2, 2, sharex=True)
    x = art.lambda_grid
    for col, basis in enumerate(("energy", "pointer")):
        state = art.matrix(basis)
        top, bottom = axes[0][col], axes[1][col]
        for i in range(4):
            top.plot(x, state[:, i, i], label=f"{i + 1}{i + 1}")
        for i, j in UPPER_PAIRS:
            bottom.plot(x, state[:, i, j], label=f"{i + 1}{j + 1}")
        for name, flag, style in (
            ("gibbs", spec.overlay_gibbs, GIBBS_STYLE),
            ("pointer_limit", spec.overlay_pointer, POINTER_STYLE),
        ):
            if not flag:
                continue
            ref = art.overlay_state(name, basis)
            _axhlines(top, np.diag(ref), style)
            _axhlines(bottom, [ref[i][j] for i, j in UPPER_PAIRS], style)
        top.set_title(f"{basis} basis")
        top.set_ylabel("diagonal")
        bottom.set_ylabel("off-diagonal")
        _set_lambda_axis(bottom, x)
        top.legend(fontsize=7, ncol=2)
        bottom.legend(fontsize=7, ncol=2)


def _fidelity_entropy_panels(fig, art: SweepArtifact, spec: FigureSpec) -> None:
    top, bottom = fig.subplots(2, 1, sharex=True)
    x = art.lambda_grid
    top.plot(x, art.columns["fidelity_gibbs"], color="tab:red", label="vs thermal state")
    top.plot(x, art.columns["fidelity_pointer"], color="tab:blue", label="vs pointer limit")
    top.set_ylabel("fidelity")
    top.legend(fontsize=8)
    bottom.plot(x, art.columns["entropy"], color="black", label="steady state")
    if spec.overlay_gibbs:
        bottom.axhline(art.overlay_scalar("gibbs_entropy"), **GIBBS_STYLE)
    if spec.overlay_pointer:
        bottom.axhline(art.overlay_scalar("pointer_limit_entropy"), **POINTER_STYLE)
    bottom.set_ylabel("entropy")
    bottom.legend(fontsize=8)
    _set_lambda_axis(bottom, x)


def _heat_panels(fig, art: SweepArtifact, spec: FigureSpec) -> None:
    top, bottom = fig.subplots(2, 1, sharex=True)
    x = art.lambda_grid
    top.plot(x, art.columns["j1"], color="tab:red", label="J1")
    top.plot(x, art.columns["j2"], color="tab:blue", label="J2")
    top.axhline(0.0, color="gray", linewidth=0.6)
    top.set_ylabel("heat current")
    top.legend(fontsize=8)
    state = art.matrix("pointer")
    for i, j in UPPER_PAIRS:
        bottom.plot(x, state[:, i, j], label=f"{i + 1}{j + 1}")
    if spec.overlay_efftemp:
        ref = art.efftemp_states()
        for i, j in UPPER_PAIRS:
            bottom.plot(x, ref[:, i, j], **EFFTEMP_STYLE)
    bottom.set_ylabel("pointer off-diagonal")
    bottom.legend(fontsize=7, ncol=2)
    _set_lambda_axis(bottom, x)


_PANELS = {
    "density": (_density_panels, (9.0, 6.5)),
    "fidelity_entropy": (_fidelity_entropy_panels, (6.0, 7.0)),
    "heat": (_heat_panels, (6.0, 7.0)),
}


def build_figure(spec: FigureSpec, art: SweepArtifact | None = None):
    """Assemble the figure without writing it (inspection hook for tests)."""
    if art is None:
        art = load_artifact(spec.input_csv)
    draw, size = _PANELS[spec.figure_kind]
    fig = plt.figure(figsize=size)
    draw(fig, art, spec)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render the figure to ``spec.output``; reads artifacts, never writes them."""
    fig = build_figure(spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    try:
        _save(fig, spec.output, spec.format)
    finally:
        plt.close(fig)
    return spec.output


def _save(fig, path: Path, fmt: str) -> None:
    kwargs = {"format": fmt, "metadata": dict(_STRIP_METADATA[fmt]), "dpi": 150}
    if fmt == "svg":
        with plt.rc_context({"svg.hashsalt": "heomfigures"}):
            fig.savefig(path, **kwargs)
    else:
        fig.savefig(path, **kwargs)
