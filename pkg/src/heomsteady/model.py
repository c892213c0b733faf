"""Two-qubit system, bath parameters, and analytic reference states.

The system is a pair of resonant qubits with an excitation-exchange coupling,

    H = (w0/2) sz x 1 + (w0/2) 1 x sz + ls (s+ x s- + s- x s+),

each qubit coupled to its own bosonic bath through X_l = sx on that qubit.
The product basis is ordered (uu, ud, du, dd). The pointer basis is the
simultaneous eigenbasis of X_1 and X_2: |0> = (|u> + |d>)/sqrt2 (eigenvalue
+1), |1> = (|u> - |d>)/sqrt2 (eigenvalue -1), ordered |00>, |01>, |10>, |11>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import (
    HERMITICITY_TOL,
    Basis,
    NotHermitian,
    hermitianize,
    hermitian_eigensystem,
)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.conj()
ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Qubit splitting ``omega0`` and exchange coupling ``lambda_s``.

    ``override_hamiltonian`` substitutes an arbitrary Hermitian 4x4 matrix for
    the generated Hamiltonian; it exists for exactly solvable test
    configurations and is rejected when not Hermitian.
    """

    omega0: float = 1.0
    lambda_s: float = 1.55
    override_hamiltonian: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.omega0 < 0.0:
            raise ValueError("omega0 must be >= 0")
        if self.override_hamiltonian is not None:
            h = np.asarray(self.override_hamiltonian, dtype=complex)
            if h.shape != (4, 4):
                raise ValueError(f"override Hamiltonian must be 4x4, got {h.shape}")
            if np.abs(h - h.conj().T).max() > HERMITICITY_TOL:
                raise NotHermitian("override Hamiltonian is not Hermitian")
            object.__setattr__(self, "override_hamiltonian", h)


@dataclass(frozen=True)
class BathSpec:
    """Drude-Lorentz bath: reorganization strength, cutoff rate, temperature."""

    lambda_b: float
    gamma: float = 0.15
    temperature: float = 1.5

    def __post_init__(self) -> None:
        if self.lambda_b < 0.0:
            raise ValueError("lambda_b must be >= 0")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be > 0")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature


@dataclass(frozen=True)
class ModelSpec:
    """Full model: the two-qubit system plus one bath per qubit."""

    system: SystemSpec
    bath1: BathSpec
    bath2: BathSpec

    @property
    def baths(self) -> tuple[BathSpec, BathSpec]:
        return (self.bath1, self.bath2)


def default_model(
    lambda_b: float,
    temperature1: float = 1.5,
    temperature2: float = 1.5,
    gamma: float = 0.15,
    omega0: float = 1.0,
    lambda_s: float = 1.55,
) -> ModelSpec:
    """Model at the standard study parameters, common coupling ``lambda_b``."""
    return ModelSpec(
        system=SystemSpec(omega0=omega0, lambda_s=lambda_s),
        bath1=BathSpec(lambda_b=lambda_b, gamma=gamma, temperature=temperature1),
        bath2=BathSpec(lambda_b=lambda_b, gamma=gamma, temperature=temperature2),
    )


def system_hamiltonian(system: SystemSpec) -> np.ndarray:
    if system.override_hamiltonian is not None:
        return system.override_hamiltonian.copy()
    h = 0.5 * system.omega0 * (np.kron(SIGMA_Z, ID2) + np.kron(ID2, SIGMA_Z))
    h = h + system.lambda_s * (
        np.kron(SIGMA_PLUS, SIGMA_MINUS) + np.kron(SIGMA_MINUS, SIGMA_PLUS)
    )
    return h


class BadIndex(ValueError):
    """Qubit/bath index outside {1, 2}."""


def coupling_operator(which: int) -> np.ndarray:
    """X_l for l in {1, 2}: sigma_x on that qubit."""
    if which == 1:
        return np.kron(SIGMA_X, ID2)
    if which == 2:
        return np.kron(ID2, SIGMA_X)
    raise BadIndex("bath index must be 1 or 2")


def pointer_basis() -> Basis:
    """Simultaneous eigenbasis of X_1, X_2: kets |00>, |01>, |10>, |11>."""
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
    cols = [np.kron(plus, plus), np.kron(plus, minus),
            np.kron(minus, plus), np.kron(minus, minus)]
    return Basis(kets=np.array(cols, dtype=complex).T)


def gibbs_state(hamiltonian: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H) / Z via eigendecomposition, shifted by the ground energy."""
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    evals, basis = hermitian_eigensystem(np.asarray(hamiltonian, dtype=complex))
    w = np.exp(-beta * (evals - evals[0]))
    w /= w.sum()
    vecs = basis.kets
    return (vecs * w) @ vecs.conj().T


def pointer_projected_gibbs(system: SystemSpec, beta: float) -> np.ndarray:
    """Gibbs state dephased in the pointer basis (off-diagonals dropped)."""
    rho = gibbs_state(system_hamiltonian(system), beta)
    p = pointer_basis().kets
    diag = np.diag(p.conj().T @ rho @ p).real
    diag = diag / diag.sum()
    return (p * diag) @ p.conj().T


def pointer_limit_diagonals(system: SystemSpec, beta: float) -> tuple[float, float]:
    """Closed-form pointer populations (rho11p, rho22p) = ((1-s)/4, (1+s)/4).

    s = sinh(b*ls)/(cosh(b*w0) + cosh(b*ls)); the other two populations repeat
    them, (rho33p, rho44p) = (rho22p, rho11p).
    """
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    s = math.sinh(beta * system.lambda_s) / (
        math.cosh(beta * system.omega0) + math.cosh(beta * system.lambda_s)
    )
    return 0.25 * (1.0 - s), 0.25 * (1.0 + s)


def correlation_constants(bath: BathSpec) -> tuple[complex, float]:
    """(c, delta) of the bath correlation C(t) ~ lam*(c e^{-g t} + 2 delta d(t)).

    delta = g*beta/6 collects the fast Matsubara tail; c = 2/beta - g*delta
    - i*g is the single retained exponential's amplitude (high-temperature
    expansion of the Drude-Lorentz kernel).
    """
    delta = bath.gamma * bath.beta / 6.0
    c = 2.0 / bath.beta - bath.gamma * delta - 1.0j * bath.gamma
    return c, delta


def spectral_density(bath: BathSpec, omega) -> np.ndarray:
    """Drude-Lorentz g(w) = 2 lam g w / (w^2 + g^2); odd in w."""
    w = np.asarray(omega, dtype=float)
    out = 2.0 * bath.lambda_b * bath.gamma * w / (w * w + bath.gamma * bath.gamma)
    return out if out.ndim else float(out)


def energy_eigensystem(system: SystemSpec) -> tuple[np.ndarray, Basis]:
    """Eigenvalues (ascending) and deterministic eigenbasis of the Hamiltonian."""
    return hermitian_eigensystem(hermitianize(system_hamiltonian(system)))
