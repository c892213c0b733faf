import math

import numpy as np
import pytest

from conftest import random_density_matrix
from heomsteady.heom import (
    CheckpointError,
    DepthMismatch,
    HierarchyState,
    IntegratorConfig,
    NumericalBlowup,
    auto_depth,
    auto_dt,
    estimate_spectral_radius,
    find_steady_state,
    g_superop,
    heom_rhs,
    hierarchy_index,
    hierarchy_labels,
    hierarchy_size,
    kernel_rhs,
    load_checkpoint,
    neighbor_tables,
    propagate,
    save_checkpoint,
    superop_commutator,
)
from heomsteady.model import (
    BadIndex,
    BathSpec,
    SystemSpec,
    correlation_constants,
    coupling_operator,
    default_model,
    energy_eigensystem,
    system_hamiltonian,
)
from heomsteady.observables import reconstruct_eta
from heomsteady.qstate import DimensionMismatch, assert_density_matrix, trace_distance


def random_hierarchy(rng, depth):
    n = hierarchy_size(depth)
    ados = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
    return HierarchyState(depth=depth, ados=ados)


# ---------------------------------------------------------------------------
# bookkeeping

def test_hierarchy_size():
    assert [hierarchy_size(d) for d in (1, 2, 3, 50)] == [3, 6, 10, 1326]
    with pytest.raises(BadIndex):
        hierarchy_size(-1)


def test_hierarchy_labels_and_index_roundtrip():
    depth = 7
    labels = hierarchy_labels(depth)
    assert len(labels) == hierarchy_size(depth)
    for i, (n1, n2) in enumerate(labels):
        assert n1 >= 0 and n2 >= 0 and n1 + n2 <= depth
        assert hierarchy_index(n1, n2, depth) == i
    # level-major: level L occupies a contiguous run
    levels = [n1 + n2 for n1, n2 in labels]
    assert levels == sorted(levels)


def test_hierarchy_index_rejects_outside():
    for bad in ((3, 3), (-1, 0), (0, 6)):
        with pytest.raises(BadIndex):
            hierarchy_index(bad[0], bad[1], 5)


def test_neighbor_tables():
    depth = 4
    n = hierarchy_size(depth)
    up1, up2, dn1, dn2 = neighbor_tables(depth)
    for i, (n1, n2) in enumerate(hierarchy_labels(depth)):
        if n1 + n2 < depth:
            assert up1[i] == hierarchy_index(n1 + 1, n2, depth)
            assert up2[i] == hierarchy_index(n1, n2 + 1, depth)
        else:
            assert up1[i] == n and up2[i] == n  # pad slot
        assert dn1[i] == (hierarchy_index(n1 - 1, n2, depth) if n1 > 0 else -1)
        assert dn2[i] == (hierarchy_index(n1, n2 - 1, depth) if n2 > 0 else -1)


def test_hierarchy_state_validation():
    rho = np.eye(4, dtype=complex) / 4.0
    h = HierarchyState.from_density_matrix(rho, depth=3)
    assert np.array_equal(h.rho, rho)
    assert np.abs(h.ado(1, 1)).max() == 0.0
    with pytest.raises(DepthMismatch):
        HierarchyState(depth=0, ados=np.zeros((1, 4, 4)))
    with pytest.raises(DepthMismatch):
        HierarchyState(depth=2, ados=np.zeros((5, 4, 4)))
    with pytest.raises(DepthMismatch):
        HierarchyState.from_density_matrix(np.eye(2), depth=2)


# ---------------------------------------------------------------------------
# superoperators

def test_superop_commutator():
    rng = np.random.default_rng(31)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    t = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.allclose(superop_commutator(x, t), x @ t - t @ x)
    assert np.allclose(superop_commutator(x, t, kind="plus"), x @ t + t @ x)
    with pytest.raises(ValueError):
        superop_commutator(x, t, kind="anti")
    with pytest.raises(DimensionMismatch):
        superop_commutator(np.eye(2), t)


def test_g_superop_formula():
    bath = BathSpec(lambda_b=0.4, gamma=0.15, temperature=1.5)
    c, _ = correlation_constants(bath)
    rng = np.random.default_rng(33)
    t = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    for q in (1, 2):
        x = coupling_operator(q)
        expected = c.real * (x @ t - t @ x) - 1j * bath.gamma * (x @ t + t @ x)
        assert np.abs(g_superop(bath, t, qubit_index=q) - expected).max() <= 1e-14


# ---------------------------------------------------------------------------
# right-hand side

def test_rhs_decoupled_physical_block():
    # lambda_b = 0 with an empty upper hierarchy: pure unitary motion
    model = default_model(0.0)
    rho = random_density_matrix(np.random.default_rng(37))
    state = HierarchyState.from_density_matrix(rho, depth=3)
    out = heom_rhs(state, model)
    h = system_hamiltonian(model.system)
    assert np.abs(out.rho - (-1j) * (h @ rho - rho @ h)).max() <= 1e-14


def test_rhs_trace_preservation_of_physical_block():
    # d/dt Tr(zeta_00) = 0 regardless of hierarchy content
    rng = np.random.default_rng(41)
    model = default_model(0.8, temperature1=2.0, temperature2=1.0)
    for _ in range(10):
        state = random_hierarchy(rng, depth=5)
        out = heom_rhs(state, model)
        assert abs(np.trace(out.rho)) <= 1e-12 * max(1.0, np.abs(state.ados).max())


def test_rhs_linearity():
    rng = np.random.default_rng(43)
    model = default_model(0.6)
    for _ in range(20):
        a = random_hierarchy(rng, depth=4)
        b = random_hierarchy(rng, depth=4)
        al, be = rng.standard_normal(2)
        combo = HierarchyState(depth=4, ados=al * a.ados + be * b.ados)
        lhs = heom_rhs(combo, model).ados
        rhs = al * heom_rhs(a, model).ados + be * heom_rhs(b, model).ados
        assert np.abs(lhs - rhs).max() <= 1e-9


def test_kernel_matches_reference_rhs():
    rng = np.random.default_rng(47)
    for depth in (1, 2, 3, 5):
        for rescale in (False, True):
            model = default_model(0.9, temperature1=1.8, temperature2=1.2)
            state = random_hierarchy(rng, depth)
            ref = heom_rhs(state, model).ados
            got = kernel_rhs(state, model, rescale=rescale).ados
            scale = max(1.0, np.abs(ref).max())
            assert np.abs(got - ref).max() / scale <= 1e-13


# ---------------------------------------------------------------------------
# propagation

def test_propagate_eigenstate_constant_at_zero_coupling():
    model = default_model(0.0)
    _, basis = energy_eigensystem(model.system)
    rho0 = np.outer(basis.ket(0), basis.ket(0).conj())
    cfg = IntegratorConfig(depth=2, dt=0.005, t_max=5.0)
    res = propagate(rho0, model, cfg)
    assert np.abs(res.hierarchy.rho - rho0).max() <= 1e-12


def test_propagate_bohr_rotation_at_zero_coupling():
    model = default_model(0.0)
    evals, basis = energy_eigensystem(model.system)
    psi = (basis.ket(0) + basis.ket(2)) / math.sqrt(2.0)
    rho0 = np.outer(psi, psi.conj())
    t_end = 2.0
    cfg = IntegratorConfig(depth=1, dt=0.005, t_max=t_end)
    res = propagate(rho0, model, cfg)
    k = basis.kets
    r0 = k.conj().T @ rho0 @ k
    rt = k.conj().T @ res.hierarchy.rho @ k
    assert np.allclose(np.diag(rt), np.diag(r0), atol=1e-10)  # populations frozen
    expected = r0[0, 2] * np.exp(-1j * (evals[0] - evals[2]) * t_end)
    assert abs(rt[0, 2] - expected) <= 1e-8  # transient contract; RK4 phase error


def test_propagate_linearity():
    model = default_model(0.3)
    cfg = IntegratorConfig(depth=6, dt=0.01, t_max=2.0)
    rng = np.random.default_rng(53)
    for _ in range(3):
        r1 = random_density_matrix(rng)
        r2 = random_density_matrix(rng)
        alpha = rng.uniform(0.1, 0.9)
        mix = propagate(alpha * r1 + (1 - alpha) * r2, model, cfg).hierarchy.ados
        parts = (
            alpha * propagate(r1, model, cfg).hierarchy.ados
            + (1 - alpha) * propagate(r2, model, cfg).hierarchy.ados
        )
        assert np.abs(mix - parts).max() <= 1e-9


def test_propagate_dt_halving_contract():
    model = default_model(0.5)
    base = dict(depth=12, t_max=10.0)
    r1 = propagate(np.eye(4, dtype=complex) / 4.0, model,
                   IntegratorConfig(dt=0.005, **base))
    r2 = propagate(np.eye(4, dtype=complex) / 4.0, model,
                   IntegratorConfig(dt=0.0025, **base))
    assert np.abs(r1.hierarchy.rho - r2.hierarchy.rho).max() <= 1e-8


def test_propagate_preserves_trace_and_hermiticity():
    model = default_model(0.5)
    cfg = IntegratorConfig(depth=12, dt=0.005, t_max=10.0)
    res = propagate(np.eye(4, dtype=complex) / 4.0, model, cfg)
    rho = res.hierarchy.rho
    assert abs(np.trace(rho) - 1.0) <= 1e-8
    assert np.abs(rho - rho.conj().T).max() <= 1e-8


def test_propagate_observer_cadence():
    model = default_model(0.2)
    cfg = IntegratorConfig(depth=4, dt=0.01, t_max=5.0, observer_stride=100)
    seen = []
    propagate(np.eye(4, dtype=complex) / 4.0, model, cfg,
              observer=lambda t, s: seen.append(t))
    assert seen == pytest.approx([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])


def test_propagate_blowup_raises():
    model = default_model(4.0)
    cfg = IntegratorConfig(depth=20, dt=0.2, t_max=50.0)  # far beyond stability
    with pytest.raises(NumericalBlowup), pytest.warns(RuntimeWarning):
        propagate(np.eye(4, dtype=complex) / 4.0, model, cfg)


def test_scaled_and_unscaled_runs_agree():
    # same physical rho and eta from both internal normalizations
    model = default_model(0.3)
    rho0 = np.eye(4, dtype=complex) / 4.0
    outs = []
    for rescale in (True, False):
        cfg = IntegratorConfig(depth=8, dt=0.01, t_max=5.0, rescale=rescale)
        outs.append(propagate(rho0, model, cfg).hierarchy)
    a, b = outs
    assert np.abs(a.rho - b.rho).max() <= 1e-10
    for bath_index in (1, 2):
        ea = reconstruct_eta(a, model, bath_index)
        eb = reconstruct_eta(b, model, bath_index)
        assert np.abs(ea - eb).max() <= 1e-10


def test_resume_from_hierarchy_state_matches_single_run():
    model = default_model(0.4)
    rho0 = np.eye(4, dtype=complex) / 4.0
    full = propagate(rho0, model, IntegratorConfig(depth=6, dt=0.01, t_max=4.0))
    half = propagate(rho0, model, IntegratorConfig(depth=6, dt=0.01, t_max=2.0))
    rest = propagate(half.hierarchy, model, IntegratorConfig(depth=6, dt=0.01, t_max=2.0))
    # handoff re-applies the internal scaling, so equality is to rounding
    assert np.abs(full.hierarchy.ados - rest.hierarchy.ados).max() <= 1e-13


def test_find_steady_state_converges():
    model = default_model(0.5)
    cfg = IntegratorConfig(depth=20, dt=0.02, t_max=2000.0)
    res = find_steady_state(np.eye(4, dtype=complex) / 4.0, model, cfg)
    assert res.converged
    assert res.residual < cfg.steady_tol
    assert res.t_converged < cfg.t_max
    assert_density_matrix(res.rho, trace_tol=1e-8, eig_tol=-1e-6)


def test_find_steady_state_flags_non_convergence():
    model = default_model(0.5)
    cfg = IntegratorConfig(depth=10, dt=0.02, t_max=5.0)
    res = find_steady_state(np.eye(4, dtype=complex) / 4.0, model, cfg)
    assert not res.converged
    assert res.t_converged == pytest.approx(cfg.t_max)


def test_steady_state_independent_of_initial():
    model = default_model(0.3)
    cfg = IntegratorConfig(depth=15, dt=0.05, t_max=2000.0)
    rng = np.random.default_rng(59)
    rhos = []
    for rho0 in (np.eye(4, dtype=complex) / 4.0, random_density_matrix(rng)):
        rhos.append(find_steady_state(rho0, model, cfg).rho)
    assert trace_distance(rhos[0], rhos[1]) <= 1e-5


# ---------------------------------------------------------------------------
# config and automatic settings

def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(depth=0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(t_max=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(steady_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(observer_stride=0)


def test_steady_window_default():
    cfg = IntegratorConfig()
    model = default_model(1.0)
    assert cfg.window(model) == pytest.approx(10.0 / 0.15)
    assert IntegratorConfig(steady_window=5.0).window(model) == 5.0


def test_dt_guide_warning():
    model = default_model(4.0)  # guide threshold 1/(10*40)
    cfg = IntegratorConfig(depth=2, dt=0.02, t_max=0.1)
    with pytest.warns(RuntimeWarning):
        propagate(np.eye(4, dtype=complex) / 4.0, model, cfg)


def test_auto_depth_table():
    assert auto_depth(0.0) == 1
    assert auto_depth(0.01) == 8
    assert auto_depth(0.05) == 12
    assert auto_depth(0.1) == 15
    assert auto_depth(0.3) == 20
    assert auto_depth(0.8) == 25
    assert auto_depth(4.0) == 30
    grid = np.geomspace(0.005, 4.0, 30)
    depths = [auto_depth(x) for x in grid]
    assert depths == sorted(depths)  # deeper as coupling grows


def test_auto_dt_and_radius():
    model = default_model(1.0)
    r = estimate_spectral_radius(model, 30)
    assert 30.0 < r < 80.0
    dt = auto_dt(model, 30)
    assert 0.0 < dt <= 0.05
    assert dt == pytest.approx(min(2.0 / r, 0.05))


# ---------------------------------------------------------------------------
# checkpointing

def test_checkpoint_roundtrip(tmp_path):
    model = default_model(0.5)
    rng = np.random.default_rng(61)
    state = random_hierarchy(rng, depth=6)
    path = tmp_path / "run.ckpt"
    save_checkpoint(path, state, 12.5, model)
    loaded, t = load_checkpoint(path, model)
    assert t == 12.5
    assert loaded.depth == 6
    assert np.array_equal(loaded.ados, state.ados)


def test_checkpoint_resume_equivalence(tmp_path):
    model = default_model(0.4)
    rho0 = np.eye(4, dtype=complex) / 4.0
    full = propagate(rho0, model, IntegratorConfig(depth=5, dt=0.01, t_max=3.0))
    half = propagate(rho0, model, IntegratorConfig(depth=5, dt=0.01, t_max=1.5))
    path = tmp_path / "half.ckpt"
    save_checkpoint(path, half.hierarchy, half.t, model)
    resumed, t0 = load_checkpoint(path, model)
    rest = propagate(resumed, model, IntegratorConfig(depth=5, dt=0.01, t_max=1.5))
    assert t0 == pytest.approx(1.5)
    assert np.abs(full.hierarchy.ados - rest.hierarchy.ados).max() <= 1e-13


def test_checkpoint_rejects_wrong_model(tmp_path):
    state = HierarchyState.from_density_matrix(np.eye(4, dtype=complex) / 4.0, 3)
    path = tmp_path / "a.ckpt"
    save_checkpoint(path, state, 1.0, default_model(0.5))
    with pytest.raises(CheckpointError):
        load_checkpoint(path, default_model(0.6))
    load_checkpoint(path)  # without a model no fingerprint check


def test_checkpoint_rejects_corruption(tmp_path):
    state = HierarchyState.from_density_matrix(np.eye(4, dtype=complex) / 4.0, 3)
    path = tmp_path / "b.ckpt"
    save_checkpoint(path, state, 1.0, default_model(0.5))
    raw = path.read_bytes()
    (tmp_path / "bad_magic.ckpt").write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "bad_magic.ckpt")
    (tmp_path / "truncated.ckpt").write_bytes(raw[:40])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "truncated.ckpt")
    (tmp_path / "short_payload.ckpt").write_bytes(raw[:-16])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "short_payload.ckpt")
