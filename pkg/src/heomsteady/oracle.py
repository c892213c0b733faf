"""Independent checks that validate the hierarchy engine before it is trusted.

Every check here computes the same physics as the production code by a
different route: a closed-form pure-dephasing solution (cross-derived twice),
a dense generator matrix assembled directly from superoperator Kronecker
products, a null-space solve of that matrix, and direct fidelity checks of
the weak-coupling steady state against the Gibbs state. The production RHS
and the dense generator share no implementation beyond the label indexing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import dblquad

from .heom import (
    HierarchyState,
    IntegratorConfig,
    auto_depth,
    auto_dt,
    find_steady_state,
    heom_rhs,
    hierarchy_index,
    hierarchy_labels,
    hierarchy_size,
    propagate,
)
from .model import (
    BathSpec,
    ModelSpec,
    SystemSpec,
    correlation_constants,
    coupling_operator,
    default_model,
    energy_eigensystem,
    gibbs_state,
    pointer_basis,
    system_hamiltonian,
)
from .qstate import fidelity, hermitianize, trace_distance

MAX_DENSE_DEPTH = 6

GAMMA_AGREEMENT_TOL = 1e-10
DENSE_RHS_TOL = 1e-12
DEPHASING_SUP_TOL = 1e-4
NULLSPACE_TDIST_TOL = 1e-5
GIBBS_FIDELITY_THRESHOLD = 0.999


class DepthTooLarge(ValueError):
    """Dense generator requested beyond the tractable size."""


# ---------------------------------------------------------------------------
# pure dephasing closed form

@dataclass(frozen=True)
class DephasingConfig:
    """Exactly solvable configuration: no system Hamiltonian, one bath active.

    With a vanishing Hamiltonian both coupling operators commute with it and
    the pointer-basis off-diagonals decay as exp(-Gamma(t)) with no
    population transfer.
    """

    bath: BathSpec
    initial_coherence: complex
    t_grid: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if any(t < 0.0 for t in self.t_grid):
            raise ValueError("t_grid times must be >= 0")


def dephasing_gamma(bath: BathSpec, t: float) -> float:
    """Decoherence exponent for a pointer-eigenvalue gap of 2.

    Double integral of the real part of the bath correlation: the retained
    exponential contributes (2/beta - g*delta)(g t - 1 + e^{-g t})/g^2 and
    the instantaneous delta part contributes delta*t; the overall 4*lam
    carries the coupling and the squared eigenvalue gap. The dissipative
    (imaginary) part of C(t) cancels between opposite-eigenvalue pointer
    states, so it never enters.
    """
    c, delta = correlation_constants(bath)
    g = bath.gamma
    ramp = (g * t - 1.0 + math.exp(-g * t)) / (g * g)
    return 4.0 * bath.lambda_b * (c.real * ramp + delta * t)


def dephasing_gamma_quadrature(bath: BathSpec, t: float) -> float:
    """Same exponent by numerical double quadrature (independent route)."""
    if t == 0.0:
        return 0.0
    c, delta = correlation_constants(bath)
    g = bath.gamma

    def integrand(u, s):
        return c.real * math.exp(-g * u)

    val, _ = dblquad(integrand, 0.0, t, 0.0, lambda s: s, epsabs=1e-13, epsrel=1e-13)
    # the delta ridge of C(t) integrates exactly; only the smooth part is quadratured
    return 4.0 * bath.lambda_b * (val + delta * t)


def dephasing_coherence(cfg: DephasingConfig, t: float) -> complex:
    if t < 0.0:
        raise ValueError("t must be >= 0")
    return cfg.initial_coherence * math.exp(-dephasing_gamma(cfg.bath, t))


# ---------------------------------------------------------------------------
# dense generator

def _com(a: np.ndarray) -> np.ndarray:
    eye = np.eye(a.shape[0])
    return np.kron(a, eye) - np.kron(eye, a.T)


def _acom(a: np.ndarray) -> np.ndarray:
    eye = np.eye(a.shape[0])
    return np.kron(a, eye) + np.kron(eye, a.T)


def dense_generator_oracle(model: ModelSpec, depth: int) -> np.ndarray:
    """The full hierarchy generator as one explicit matrix.

    Assembled in the computational basis from Kronecker-product
    superoperators, physical (unrescaled) member normalization, row-major
    vectorization, members ordered exactly as hierarchy_labels. Intended for
    cross-checking the production right-hand side and for null-space steady
    states; dimension grows as 16*(depth+1)(depth+2)/2.
    """
    if depth > MAX_DENSE_DEPTH:
        raise DepthTooLarge(f"dense generator limited to depth {MAX_DENSE_DEPTH}, got {depth}")
    n = hierarchy_size(depth)
    labels = hierarchy_labels(depth)
    h = system_hamiltonian(model.system)
    gen = np.zeros((16 * n, 16 * n), dtype=complex)

    per_bath = []
    for b, x in ((model.bath1, coupling_operator(1)), (model.bath2, coupling_operator(2))):
        c, delta = correlation_constants(b)
        per_bath.append(
            {
                "com": _com(x),
                "acom": _acom(x),
                "lam": b.lambda_b,
                "gamma": b.gamma,
                "re_c": c.real,
                "delta": delta,
            }
        )

    hcom = _com(h)
    eye16 = np.eye(16)
    for i, (n1, n2) in enumerate(labels):
        row = slice(16 * i, 16 * (i + 1))
        diag = -1.0j * hcom
        diag = diag - (per_bath[0]["gamma"] * n1 + per_bath[1]["gamma"] * n2) * eye16
        for pb in per_bath:
            diag = diag - pb["lam"] * pb["delta"] * (pb["com"] @ pb["com"])
        gen[row, row] += diag
        for ell, (pb, nl) in enumerate(zip(per_bath, (n1, n2))):
            step = (1, 0) if ell == 0 else (0, 1)
            if n1 + n2 < depth:
                j = hierarchy_index(n1 + step[0], n2 + step[1], depth)
                gen[row, 16 * j:16 * (j + 1)] += -1.0j * pb["lam"] * pb["com"]
            if nl > 0:
                j = hierarchy_index(n1 - step[0], n2 - step[1], depth)
                down = pb["re_c"] * pb["com"] - 1.0j * pb["gamma"] * pb["acom"]
                gen[row, 16 * j:16 * (j + 1)] += -1.0j * nl * down
    return gen


def stack_hierarchy(state: HierarchyState) -> np.ndarray:
    return state.ados.reshape(-1)


def unstack_hierarchy(vec: np.ndarray, depth: int) -> HierarchyState:
    n = hierarchy_size(depth)
    return HierarchyState(depth=depth, ados=vec.reshape(n, 4, 4).copy())


def null_space_steady_state(model: ModelSpec, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Steady state from the generator null space (no time integration).

    The singular linear system is closed by replacing the first row with the
    trace functional on the physical block; one round of iterative refinement
    brings the residual to machine precision. Returns the renormalized
    physical density matrix and the full stacked solution.
    """
    gen = dense_generator_oracle(model, depth)
    m = gen.copy()
    rhs = np.zeros(m.shape[0], dtype=complex)
    m[0, :] = 0.0
    for d in range(4):
        m[0, 5 * d] = 1.0  # trace of the physical block
    rhs[0] = 1.0
    x = np.linalg.solve(m, rhs)
    x += np.linalg.solve(m, rhs - m @ x)
    rho = hermitianize(x[:16].reshape(4, 4))
    rho /= np.trace(rho).real
    return rho, x


# ---------------------------------------------------------------------------
# check suite

@dataclass(frozen=True)
class CheckResult:
    """One verification outcome; ``value`` compared against ``threshold``."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str

    def __post_init__(self) -> None:
        # call sites mix numpy and python scalars; keep the record JSON-clean
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "threshold", float(self.threshold))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


def gamma_agreement_check() -> CheckResult:
    """Closed-form decoherence exponent vs numerical double quadrature."""
    worst = 0.0
    for lam in (0.05, 0.5):
        bath = BathSpec(lambda_b=lam, gamma=0.15, temperature=1.5)
        for t in (1.0, 5.0, 10.0, 25.0, 50.0):
            a = dephasing_gamma(bath, t)
            b = dephasing_gamma_quadrature(bath, t)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return CheckResult(
        name="gamma_cross_derivation",
        passed=worst <= GAMMA_AGREEMENT_TOL,
        value=worst,
        threshold=GAMMA_AGREEMENT_TOL,
        detail="two derivations of the dephasing exponent, relative disagreement",
    )


def dense_vs_rhs_check() -> CheckResult:
    """Production right-hand side vs dense generator on random hierarchies."""
    model = ModelSpec(
        system=SystemSpec(omega0=1.0, lambda_s=1.55),
        bath1=BathSpec(lambda_b=0.37, gamma=0.15, temperature=2.0),
        bath2=BathSpec(lambda_b=0.37, gamma=0.11, temperature=1.0),
    )
    rng = np.random.default_rng(2024)
    worst = 0.0
    for depth in (1, 2, 3, 4):
        n = hierarchy_size(depth)
        ados = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
        state = HierarchyState(depth=depth, ados=ados)
        via_rhs = stack_hierarchy(heom_rhs(state, model))
        via_dense = dense_generator_oracle(model, depth) @ stack_hierarchy(state)
        scale = max(1.0, float(np.abs(via_dense).max()))
        worst = max(worst, float(np.abs(via_rhs - via_dense).max()) / scale)
    return CheckResult(
        name="dense_generator_vs_rhs",
        passed=worst <= DENSE_RHS_TOL,
        value=worst,
        threshold=DENSE_RHS_TOL,
        detail="max elementwise disagreement, depths 1-4, random hierarchies",
    )


def bohr_spectrum_check() -> CheckResult:
    """Decoupled generator: physical block carries the Bohr frequencies."""
    model = default_model(0.0)
    gen = dense_generator_oracle(model, 1)
    block = gen[:16, :16]
    up = gen[:16, 16:]
    evals, _ = energy_eigensystem(model.system)
    expected = sorted((-(1.0j) * (ei - ej) for ei in evals for ej in evals), key=lambda z: z.imag)
    got = sorted(np.linalg.eigvals(block), key=lambda z: z.imag)
    err = max(abs(a - b) for a, b in zip(got, expected))
    err = max(err, float(np.abs(up).max()))
    return CheckResult(
        name="bohr_spectrum",
        passed=err <= 1e-9,
        value=float(err),
        threshold=1e-9,
        detail="eigenvalues of the decoupled physical block vs +-i(e_i - e_j); coupling blocks zero",
    )


def dephasing_heom_check() -> CheckResult:
    """Full engine vs closed form on the exactly solvable dephasing model."""
    bath = BathSpec(lambda_b=0.05, gamma=0.15, temperature=1.5)
    model = ModelSpec(
        system=SystemSpec(omega0=0.0, lambda_s=0.0),
        bath1=bath,
        bath2=bath,
    )
    p = pointer_basis().kets
    psi = (p[:, 0] + p[:, 2]) / math.sqrt(2.0)  # coherence 0.5 across bath 1's gap
    rho0 = np.outer(psi, psi.conj())
    # this depth at this weak a coupling has a large benign transient in the
    # deep members (it decays); lift the guard above it
    cfg = IntegratorConfig(depth=20, dt=0.005, t_max=50.0, observer_stride=100,
                           blowup_norm=1e16)
    times, coh = [], []

    def observer(t, state):
        times.append(t)
        coh.append((p[:, 0].conj() @ state.rho @ p[:, 2]))

    propagate(rho0, model, cfg, observer=observer)
    dcfg = DephasingConfig(bath=bath, initial_coherence=0.5, t_grid=tuple(times))
    sup = max(
        abs(c - dephasing_coherence(dcfg, t)) for t, c in zip(times, coh)
    )
    return CheckResult(
        name="dephasing_vs_closed_form",
        passed=sup <= DEPHASING_SUP_TOL,
        value=float(sup),
        threshold=DEPHASING_SUP_TOL,
        detail="sup over t in [0,50] of the pointer coherence error, depth 20",
    )


def nullspace_gibbs_check() -> CheckResult:
    """Null-space steady state at weak coupling is the Gibbs state."""
    model = default_model(0.01)
    rho, _ = null_space_steady_state(model, 6)
    gibbs = gibbs_state(system_hamiltonian(model.system), model.bath1.beta)
    fid = fidelity(rho, gibbs)
    return CheckResult(
        name="nullspace_gibbs_fidelity",
        passed=fid >= GIBBS_FIDELITY_THRESHOLD,
        value=float(fid),
        threshold=GIBBS_FIDELITY_THRESHOLD,
        detail="generator null space at depth 6, lambda_b=0.01, vs Gibbs",
    )


def nullspace_vs_timeevolved_check() -> CheckResult:
    """Algebraic and propagated steady states agree at matched depth."""
    model = default_model(0.01)
    depth = 6
    rho_null, _ = null_space_steady_state(model, depth)
    cfg = IntegratorConfig(depth=depth, dt=auto_dt(model, depth), t_max=8000.0, steady_tol=1e-9)
    res = find_steady_state(np.eye(4, dtype=complex) / 4.0, model, cfg)
    dist = trace_distance(rho_null, res.rho)
    return CheckResult(
        name="nullspace_vs_time_evolved",
        passed=bool(res.converged and dist <= NULLSPACE_TDIST_TOL),
        value=float(dist),
        threshold=NULLSPACE_TDIST_TOL,
        detail="trace distance, depth 6, lambda_b=0.01",
    )


def weak_coupling_gibbs_check(model: ModelSpec, t_max: float = 15000.0) -> CheckResult:
    """Report-only fidelity of the propagated steady state to the Gibbs state."""
    lam = model.bath1.lambda_b
    depth = auto_depth(lam)
    cfg = IntegratorConfig(depth=depth, dt=auto_dt(model, depth), t_max=t_max)
    with warnings.catch_warnings():
        # the step intentionally exceeds the transient-accuracy guide;
        # only the fixed point is consumed
        warnings.simplefilter("ignore", RuntimeWarning)
        res = find_steady_state(np.eye(4, dtype=complex) / 4.0, model, cfg)
    t_ref = 0.5 * (model.bath1.temperature + model.bath2.temperature)
    gibbs = gibbs_state(system_hamiltonian(model.system), 1.0 / t_ref)
    fid = fidelity(res.rho, gibbs)
    return CheckResult(
        name=f"weak_coupling_gibbs_T{t_ref:g}_lam{lam:g}",
        passed=bool(res.converged and fid >= GIBBS_FIDELITY_THRESHOLD),
        value=float(fid),
        threshold=GIBBS_FIDELITY_THRESHOLD,
        detail="steady-state fidelity to the Gibbs state",
    )


def strong_coupling_negative_control() -> CheckResult:
    """The Gibbs property must visibly fail at strong coupling."""
    inner = weak_coupling_gibbs_check(default_model(2.0), t_max=4000.0)
    return CheckResult(
        name="strong_coupling_negative_control",
        passed=not inner.passed,
        value=inner.value,
        threshold=inner.threshold,
        detail="lambda_b=2 steady state must NOT reach Gibbs fidelity 0.999",
    )


def verify_all() -> list[CheckResult]:
    """Full verification suite, cheap checks first.

    The second weak-coupling temperature is 2.5, not lower: the one
    exponential plus instantaneous-correction form of the bath correlation is
    a high-temperature representation, and below T of about 1 its steady
    state genuinely departs from Gibbs (0.945 fidelity at T=0.5, confirmed
    independently by the generator null space), so a colder check would test
    the bath approximation's validity range rather than the engine.
    """
    results = [
        gamma_agreement_check(),
        dense_vs_rhs_check(),
        bohr_spectrum_check(),
        nullspace_gibbs_check(),
        dephasing_heom_check(),
        nullspace_vs_timeevolved_check(),
        weak_coupling_gibbs_check(default_model(0.01, temperature1=1.5, temperature2=1.5)),
        weak_coupling_gibbs_check(default_model(0.01, temperature1=2.5, temperature2=2.5)),
        strong_coupling_negative_control(),
    ]
    return results
