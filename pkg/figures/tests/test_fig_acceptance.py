"""Figure acceptance: render all three kinds from real sweep artifacts.

A compact sweep from the simulation package provides genuine CSV + sidecar
inputs; every overlay value asserted below is read back from the sidecar, so
the comparison would fail if the renderer computed anything itself.
"""
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

import matplotlib.pyplot as plt

from figtestlib import acceptance_line, curves_with_style, hline_values
from heomfigures.figspec import FigureSpec
from heomfigures.render import build_figure, render

heomsteady_runner = pytest.importorskip(
    "heomsteady.runner", reason="simulation package needed to produce real artifacts"
)


@pytest.fixture(scope="module")
def real_artifacts(tmp_path_factory):
    from heomsteady.model import SystemSpec
    from heomsteady.runner import (
        InitialState,
        SweepConfig,
        run_equilibrium_sweep,
        run_ness_sweep,
    )

    out_eq = tmp_path_factory.mktemp("real_eq")
    out_ness = tmp_path_factory.mktemp("real_ness")
    base = dict(
        system=SystemSpec(),
        gamma1=0.15,
        gamma2=0.15,
        temperature1=1.5,
        temperature2=1.5,
        lambda_grid=(0.05, 0.2, 0.5),
        initial_states=(InitialState(kind="ground"),),
        depth=12,
        dt=None,
        t_max=4000.0,
        steady_tol=1e-7,
        steady_window=None,
        rescale=True,
        observer_stride=1000,
        output_dir=out_eq,
        parallelism=1,
    )
    eq = run_equilibrium_sweep(SweepConfig(**base))
    ness = run_ness_sweep(
        SweepConfig(
            **{
                **base,
                "temperature1": 2.0,
                "temperature2": 1.0,
                "output_dir": out_ness,
                "efftemp_reference": eq.csv_path,
            }
        )
    )
    assert eq.all_converged and ness.all_converged
    return eq, ness


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_a10_figures_from_real_artifacts(real_artifacts, tmp_path):
    eq, ness = real_artifacts
    eq_side = json.loads(eq.sidecar_path.read_text())
    ness_side = json.loads(ness.sidecar_path.read_text())
    hashes = {p: _sha(p) for p in (eq.csv_path, eq.sidecar_path, ness.csv_path, ness.sidecar_path)}

    density = FigureSpec(
        input_csv=eq.csv_path, figure_kind="density", output=tmp_path / "density.png"
    )
    fig = build_figure(density)
    try:
        energy_top, pointer_top = fig.axes[0], fig.axes[1]
        red = sorted(hline_values(energy_top, "tab:red"))
        want_red = sorted(np.diag(eq_side["overlays"]["gibbs"]["energy"]["re"]))
        assert np.allclose(red, want_red, atol=0.0)
        blue = sorted(hline_values(pointer_top, "tab:blue"))
        want_blue = sorted(np.diag(eq_side["overlays"]["pointer_limit"]["pointer"]["re"]))
        assert np.allclose(blue, want_blue, atol=0.0)
        anchors = sorted(eq_side["overlays"]["pointer_limit_diagonals"])
        assert blue[0] == pytest.approx(anchors[0], abs=1e-12)
        assert blue[-1] == pytest.approx(anchors[1], abs=1e-12)
    finally:
        plt.close(fig)

    fidelity = FigureSpec(
        input_csv=eq.csv_path,
        figure_kind="fidelity_entropy",
        output=tmp_path / "fidelity.png",
    )
    fig = build_figure(fidelity)
    try:
        bottom = fig.axes[1]
        assert hline_values(bottom, "tab:red") == [eq_side["overlays"]["gibbs_entropy"]]
        assert hline_values(bottom, "tab:blue") == [
            eq_side["overlays"]["pointer_limit_entropy"]
        ]
    finally:
        plt.close(fig)

    heat = FigureSpec(
        input_csv=ness.csv_path, figure_kind="heat", output=tmp_path / "heat.png"
    )
    fig = build_figure(heat)
    try:
        dotted = curves_with_style(fig.axes[1], "black", ":")
        assert len(dotted) == 6
        ref = np.array(
            [p["rho_pointer"]["re"] for p in ness_side["efftemp"]["points"]]
        )
        pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        drawn = sorted(tuple(c) for c in dotted)
        want = sorted(tuple(ref[:, i, j]) for i, j in pairs)
        assert drawn == want
    finally:
        plt.close(fig)

    outputs = []
    for spec in (density, fidelity, heat):
        out = render(spec)
        first = out.read_bytes()
        render(spec)
        assert out.read_bytes() == first, f"non-deterministic render for {spec.figure_kind}"
        outputs.append(out)
    assert all(p.stat().st_size > 5000 for p in outputs)
    assert {p: _sha(p) for p in hashes} == hashes, "renderer modified its inputs"

    acceptance_line(
        "A10 PASS density, fidelity_entropy, and heat figures rendered from real "
        "sweep artifacts; overlays taken from the sidecar; deterministic re-render; "
        "inputs untouched"
    )
