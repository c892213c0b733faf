"""Observables of a (converged) hierarchy: bath operators, heat, records.

The first-level hierarchy members carry exactly the system-bath correlations
needed to reconstruct eta_l, the bath-contracted coupling operator whose
commutator with X_l closes the reduced equation of motion. Heat currents
follow from it without ever touching the bath Hilbert space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heom import HierarchyState
from .model import (
    ModelSpec,
    correlation_constants,
    coupling_operator,
    energy_eigensystem,
    gibbs_state,
    pointer_basis,
    pointer_projected_gibbs,
    system_hamiltonian,
)
from .qstate import (
    Basis,
    DimensionMismatch,
    fidelity,
    hermitianize,
    von_neumann_entropy,
)

ETA_IMAG_TOL = 1e-9
EQUAL_SPECTRA_TOL = 1e-9


class DepthTooSmall(ValueError):
    """Hierarchy too shallow to reconstruct the requested quantity."""


class ImaginaryResidueTooLarge(RuntimeError):
    """Heat current came out complex; the hierarchy state is inconsistent."""


def reconstruct_eta(h: HierarchyState, model: ModelSpec, bath_index: int) -> np.ndarray:
    """eta_l = lambda_l (z_{1_l} - i delta_l [X_l, z_00]).

    Hermitian whenever the hierarchy is; requires depth >= 1 because the
    first-level member enters directly.
    """
    if h.depth < 1:
        raise DepthTooSmall("eta reconstruction needs hierarchy depth >= 1")
    bath = model.baths[bath_index - 1]
    x = coupling_operator(bath_index)
    z1 = h.ado(1, 0) if bath_index == 1 else h.ado(0, 1)
    _, delta = correlation_constants(bath)
    rho = h.rho
    return bath.lambda_b * (z1 - 1j * delta * (x @ rho - rho @ x))


def heat_current(
    h: HierarchyState,
    model: ModelSpec,
    bath_index: int,
    imag_tol: float = ETA_IMAG_TOL,
) -> float:
    """J_l = -i Tr([X_l, eta_l] H); positive means bath l heats the system.

    The trace is real for any Hermitian hierarchy; a residue above
    ``imag_tol`` signals a corrupted state and raises rather than being
    silently discarded.
    """
    eta = reconstruct_eta(h, model, bath_index)
    x = coupling_operator(bath_index)
    hs = system_hamiltonian(model.system)
    val = -1j * np.trace((x @ eta - eta @ x) @ hs)
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise ImaginaryResidueTooLarge(
            f"heat current has imaginary part {val.imag:.3e}"
        )
    return float(val.real)


def basis_resolved(rho: np.ndarray, basis: Basis) -> np.ndarray:
    """Matrix elements <b_i| rho |b_j> of a state in the given basis."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"state shape {rho.shape} vs basis dim {basis.dim}")
    k = basis.kets
    return k.conj().T @ rho @ k


@dataclass
class ObservableRecord:
    """Everything recorded per steady-state point.

    ``rho_energy`` and ``rho_pointer`` are the same state resolved in the
    ascending energy eigenbasis and in the pointer basis; their spectra must
    agree (unitary transforms of one matrix). Reference states for the
    fidelities are evaluated at the mean bath temperature, which reduces to
    the common temperature in equilibrium.
    """

    lambda_b: float
    t_converged: float
    converged: bool
    rho_energy: np.ndarray
    rho_pointer: np.ndarray
    entropy: float
    fidelity_gibbs: float
    fidelity_pointer: float
    j1: float
    j2: float

    def __post_init__(self) -> None:
        se = np.linalg.eigvalsh(hermitianize(self.rho_energy))
        sp = np.linalg.eigvalsh(hermitianize(self.rho_pointer))
        dev = float(np.abs(se - sp).max())
        if dev > EQUAL_SPECTRA_TOL:
            raise ValueError(f"basis-resolved spectra disagree by {dev:.3e}")


def record(
    h: HierarchyState,
    model: ModelSpec,
    lambda_b: float,
    t_converged: float,
    converged: bool,
) -> ObservableRecord:
    """Bundle every plotted quantity for one steady-state point."""
    rho = hermitianize(h.rho)
    _, ebasis = energy_eigensystem(model.system)
    t_ref = 0.5 * (model.bath1.temperature + model.bath2.temperature)
    beta_ref = 1.0 / t_ref
    gibbs = gibbs_state(system_hamiltonian(model.system), beta_ref)
    pointer_ref = pointer_projected_gibbs(model.system, beta_ref)
    return ObservableRecord(
        lambda_b=lambda_b,
        t_converged=t_converged,
        converged=converged,
        rho_energy=basis_resolved(rho, ebasis),
        rho_pointer=basis_resolved(rho, pointer_basis()),
        entropy=von_neumann_entropy(rho),
        fidelity_gibbs=fidelity(rho, gibbs),
        fidelity_pointer=fidelity(rho, pointer_ref),
        j1=heat_current(h, model, 1),
        j2=heat_current(h, model, 2),
    )
