"""Figure spec parsing and validation."""
from pathlib import Path

import pytest

from heomfigures.figspec import FigureConfigError, FigureSpec, load_figure_spec


def test_spec_defaults_and_format_inference():
    spec = FigureSpec(
        input_csv="out/sweep_eq.csv", figure_kind="density", output="fig.png"
    )
    assert spec.format == "png"
    assert spec.overlay_gibbs and spec.overlay_pointer
    assert spec.overlay_efftemp is False
    heat = FigureSpec(
        input_csv="out/sweep_ness.csv", figure_kind="heat", output="fig.svg"
    )
    assert heat.format == "svg"
    assert heat.overlay_efftemp is True


def test_spec_rejects_bad_values():
    with pytest.raises(FigureConfigError, match="figure_kind"):
        FigureSpec(input_csv="a.csv", figure_kind="pie", output="fig.png")
    with pytest.raises(FigureConfigError, match="format"):
        FigureSpec(input_csv="a.csv", figure_kind="heat", output="fig.bmp")
    with pytest.raises(FigureConfigError, match="format"):
        FigureSpec(input_csv="a.csv", figure_kind="heat", output="fig")


def test_load_spec_resolves_paths(tmp_path):
    spec_file = tmp_path / "nested" / "fig.toml"
    spec_file.parent.mkdir()
    spec_file.write_text(
        """
input_csv = "../data/sweep_eq.csv"
figure_kind = "fidelity_entropy"
output = "figs/out.pdf"

[reference_overlays]
gibbs = false
pointer = true
"""
    )
    spec = load_figure_spec(spec_file)
    assert spec.input_csv == spec_file.parent / "../data/sweep_eq.csv"
    assert spec.output == spec_file.parent / "figs/out.pdf"
    assert spec.format == "pdf"
    assert spec.overlay_gibbs is False
    assert spec.overlay_pointer is True
    assert spec.overlay_efftemp is False  # not heat


def test_load_spec_explicit_format_wins(tmp_path):
    spec_file = tmp_path / "fig.toml"
    spec_file.write_text(
        'input_csv = "a.csv"\nfigure_kind = "heat"\noutput = "raw.bin"\nformat = "png"\n'
    )
    assert load_figure_spec(spec_file).format == "png"


def test_load_spec_errors(tmp_path):
    with pytest.raises(FigureConfigError, match="not found"):
        load_figure_spec(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("= broken")
    with pytest.raises(FigureConfigError, match="malformed"):
        load_figure_spec(bad)
    missing = tmp_path / "missing.toml"
    missing.write_text('figure_kind = "heat"\noutput = "a.png"\n')
    with pytest.raises(FigureConfigError, match="input_csv"):
        load_figure_spec(missing)
    unknown = tmp_path / "unknown.toml"
    unknown.write_text(
        'input_csv = "a.csv"\nfigure_kind = "heat"\noutput = "a.png"\n'
        "[reference_overlays]\nshade = true\n"
    )
    with pytest.raises(FigureConfigError, match="overlay switch"):
        load_figure_spec(unknown)
    nonbool = tmp_path / "nonbool.toml"
    nonbool.write_text(
        'input_csv = "a.csv"\nfigure_kind = "heat"\noutput = "a.png"\n'
        "[reference_overlays]\ngibbs = 1\n"
    )
    with pytest.raises(FigureConfigError, match="boolean"):
        load_figure_spec(nonbool)
