"""Bath-operator reconstruction, heat currents, and per-point records."""
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import random_density_matrix
from heomsteady.heom import HierarchyState, IntegratorConfig, auto_dt, find_steady_state
from heomsteady.model import (
    correlation_constants,
    coupling_operator,
    default_model,
    energy_eigensystem,
    gibbs_state,
    pointer_basis,
    pointer_projected_gibbs,
    system_hamiltonian,
)
from heomsteady.observables import (
    DepthTooSmall,
    ImaginaryResidueTooLarge,
    ObservableRecord,
    basis_resolved,
    heat_current,
    reconstruct_eta,
    record,
)
from heomsteady.qstate import (
    DimensionMismatch,
    fidelity,
    hermitianize,
    von_neumann_entropy,
)


def _steady(model, depth=15):
    cfg = IntegratorConfig(
        depth=depth,
        dt=auto_dt(model, depth),
        t_max=3000.0,
        steady_tol=1e-8,
    )
    res = find_steady_state(np.eye(4) / 4.0, model, cfg)
    assert res.converged
    return res


@pytest.fixture(scope="module")
def ness_point():
    model = default_model(0.2, temperature1=2.0, temperature2=1.0)
    return model, _steady(model)


@pytest.fixture(scope="module")
def eq_point():
    model = default_model(0.2)
    return model, _steady(model)


def _random_hierarchy(rng, depth):
    h = HierarchyState.from_density_matrix(random_density_matrix(rng), depth)
    raw = rng.standard_normal(h.ados.shape) + 1j * rng.standard_normal(h.ados.shape)
    h.ados[1:] = 0.05 * (raw[1:] + raw[1:].conj().transpose(0, 2, 1))
    return h


def test_reconstruct_eta_matches_definition():
    rng = np.random.default_rng(7)
    model = default_model(0.3, temperature1=1.2, temperature2=0.9, gamma=0.2)
    h = _random_hierarchy(rng, depth=4)
    for bath_index, bath in ((1, model.bath1), (2, model.bath2)):
        x = coupling_operator(bath_index)
        z1 = h.ado(1, 0) if bath_index == 1 else h.ado(0, 1)
        _, delta = correlation_constants(bath)
        want = bath.lambda_b * (z1 - 1j * delta * (x @ h.rho - h.rho @ x))
        got = reconstruct_eta(h, model, bath_index)
        assert np.abs(got - want).max() < 1e-14


def test_reconstruct_eta_hermitian_for_hermitian_hierarchy():
    rng = np.random.default_rng(11)
    model = default_model(0.5)
    h = _random_hierarchy(rng, depth=3)
    for bath_index in (1, 2):
        eta = reconstruct_eta(h, model, bath_index)
        assert np.abs(eta - eta.conj().T).max() < 1e-14


def test_reconstruct_eta_requires_depth():
    # HierarchyState itself refuses depth 0, so fake the attribute.
    stub = SimpleNamespace(depth=0)
    with pytest.raises(DepthTooSmall):
        reconstruct_eta(stub, default_model(0.1), 1)


def test_heat_current_signs_under_bias(ness_point):
    model, res = ness_point
    j1 = heat_current(res.hierarchy, model, 1)
    j2 = heat_current(res.hierarchy, model, 2)
    # hot bath pushes energy in, cold bath carries it out
    assert j1 > 0.0
    assert j2 < 0.0
    assert abs(j1 + j2) < 1e-6


def test_heat_current_vanishes_in_equilibrium(eq_point):
    model, res = eq_point
    assert abs(heat_current(res.hierarchy, model, 1)) < 1e-6
    assert abs(heat_current(res.hierarchy, model, 2)) < 1e-6


def test_heat_current_rejects_corrupted_hierarchy():
    model = default_model(0.4)
    h = HierarchyState.from_density_matrix(np.eye(4) / 4.0, 2)
    rng = np.random.default_rng(3)
    # non-hermitian first-level members leave a complex trace
    h.ados[1:3] = rng.standard_normal((2, 4, 4)) + 1j * rng.standard_normal((2, 4, 4))
    for bath_index in (1, 2):
        with pytest.raises(ImaginaryResidueTooLarge):
            heat_current(h, model, bath_index)


def test_basis_resolved_identity_and_unitarity():
    rng = np.random.default_rng(19)
    rho = random_density_matrix(rng)
    _, ebasis = energy_eigensystem(default_model(0.1).system)
    resolved = basis_resolved(rho, ebasis)
    assert abs(np.trace(resolved) - 1.0) < 1e-12
    want = np.sort(np.linalg.eigvalsh(rho))
    got = np.sort(np.linalg.eigvalsh(hermitianize(resolved)))
    assert np.abs(want - got).max() < 1e-12
    # round trip through the basis kets
    k = ebasis.kets
    assert np.abs(k @ resolved @ k.conj().T - rho).max() < 1e-12


def test_basis_resolved_checks_dimensions():
    with pytest.raises(DimensionMismatch):
        basis_resolved(np.eye(2) / 2.0, pointer_basis())


def test_record_fields_are_consistent(eq_point):
    model, res = eq_point
    rec = record(res.hierarchy, model, 0.2, res.t_converged, res.converged)
    rho = hermitianize(res.rho)
    assert rec.lambda_b == 0.2
    assert rec.t_converged == res.t_converged
    assert rec.converged is True
    assert abs(rec.entropy - von_neumann_entropy(rho)) < 1e-12
    beta = 1.0 / 1.5
    hs = system_hamiltonian(model.system)
    assert abs(rec.fidelity_gibbs - fidelity(rho, gibbs_state(hs, beta))) < 1e-12
    pref = pointer_projected_gibbs(model.system, beta)
    assert abs(rec.fidelity_pointer - fidelity(rho, pref)) < 1e-12
    assert abs(rec.j1 - heat_current(res.hierarchy, model, 1)) < 1e-15
    assert abs(rec.j2 - heat_current(res.hierarchy, model, 2)) < 1e-15
    assert abs(np.trace(rec.rho_energy) - 1.0) < 1e-10
    assert abs(np.trace(rec.rho_pointer) - 1.0) < 1e-10


def test_record_uses_mean_temperature_reference(ness_point):
    model, res = ness_point
    rec = record(res.hierarchy, model, 0.2, res.t_converged, res.converged)
    rho = hermitianize(res.rho)
    beta_ref = 1.0 / 1.5  # mean of T1=2 and T2=1
    hs = system_hamiltonian(model.system)
    assert abs(rec.fidelity_gibbs - fidelity(rho, gibbs_state(hs, beta_ref))) < 1e-12


def test_observable_record_rejects_mismatched_spectra():
    rng = np.random.default_rng(23)
    a = random_density_matrix(rng)
    b = random_density_matrix(rng)
    with pytest.raises(ValueError, match="spectra"):
        ObservableRecord(
            lambda_b=1.0,
            t_converged=1.0,
            converged=True,
            rho_energy=a,
            rho_pointer=b,
            entropy=0.0,
            fidelity_gibbs=1.0,
            fidelity_pointer=1.0,
            j1=0.0,
            j2=0.0,
        )
