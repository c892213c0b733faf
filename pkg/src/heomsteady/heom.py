"""Hierarchy state, indexing, equations of motion, and the RK4 integrator.

Auxiliary density operators (ADOs) carry a pair of bath indices (n1, n2) and
are truncated at a total level n1 + n2 <= depth; members outside the pyramid
are identically zero (hard truncation). Storage is a flat contiguous
(n_ados, 4, 4) array ordered by total level, then by n1, with precomputed
index and neighbor tables, so the inner sweep is branch-light.

The physical normalization is fixed by requiring that the zeroth member is
the reduced state and that the first-level members enter the bath-operator
reconstruction with unit weight. In that normalization the equations of
motion read

    d z_{n1,n2}/dt = -i [H, z] - (g1 n1 + g2 n2) z
                     - sum_l lam_l D_l [X_l, [X_l, z]]
                     - i sum_l ( lam_l [X_l, z_{+1_l}] + n_l G_l(z_{-1_l}) )

with G_l(t) = Re(c_l) [X_l, t] - i g_l {X_l, t}. The integrator can evolve a
factorially rescaled representation (z / sqrt(n1! n2!)) that keeps member
magnitudes comparable at depth ~50; both representations agree on the
physical state and are exposed identically.
"""
from __future__ import annotations

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .model import (
    BadIndex,
    BathSpec,
    ModelSpec,
    correlation_constants,
    coupling_operator,
    pointer_basis,
    system_hamiltonian,
)
from .qstate import DimensionMismatch, hermitianize, trace_distance

DIM = 4

CHECKPOINT_MAGIC = b"HEOMSSCK"
CHECKPOINT_VERSION = 1


class DepthMismatch(ValueError):
    """Hierarchy states with different truncation depths were combined."""


class NumericalBlowup(RuntimeError):
    """An ADO norm exceeded the blowup guard (insufficient depth or dt too large)."""


class CheckpointError(ValueError):
    """Checkpoint file is malformed or belongs to different parameters."""


# ---------------------------------------------------------------------------
# indexing

def hierarchy_size(depth: int) -> int:
    """Number of ADOs with n1 + n2 <= depth."""
    if depth < 0:
        raise BadIndex("depth must be >= 0")
    return (depth + 1) * (depth + 2) // 2


def hierarchy_labels(depth: int) -> np.ndarray:
    """(n_ados, 2) int array of (n1, n2), level-major, n1 ascending."""
    out = np.empty((hierarchy_size(depth), 2), dtype=np.int64)
    i = 0
    for level in range(depth + 1):
        for n1 in range(level + 1):
            out[i, 0] = n1
            out[i, 1] = level - n1
            i += 1
    return out


def hierarchy_index(n1: int, n2: int, depth: int) -> int:
    """Flat offset of label (n1, n2); raises BadIndex outside the pyramid."""
    if n1 < 0 or n2 < 0 or n1 + n2 > depth:
        raise BadIndex(f"label ({n1}, {n2}) outside depth-{depth} hierarchy")
    level = n1 + n2
    return level * (level + 1) // 2 + n1


def neighbor_tables(depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Neighbor offsets (up1, up2, dn1, dn2) for every ADO.

    Up entries point at the zero pad slot (index n_ados) when the neighbor
    falls outside the pyramid; down entries use -1.
    """
    labels = hierarchy_labels(depth)
    n = len(labels)
    up1 = np.full(n, n, dtype=np.int64)
    up2 = np.full(n, n, dtype=np.int64)
    dn1 = np.full(n, -1, dtype=np.int64)
    dn2 = np.full(n, -1, dtype=np.int64)
    for i, (n1, n2) in enumerate(labels):
        if n1 + n2 < depth:
            up1[i] = hierarchy_index(n1 + 1, n2, depth)
            up2[i] = hierarchy_index(n1, n2 + 1, depth)
        if n1 > 0:
            dn1[i] = hierarchy_index(n1 - 1, n2, depth)
        if n2 > 0:
            dn2[i] = hierarchy_index(n1, n2 - 1, depth)
    return up1, up2, dn1, dn2


# ---------------------------------------------------------------------------
# state

@dataclass
class HierarchyState:
    """Stacked ADOs in the physical normalization; ados[0] is the reduced state."""

    depth: int
    ados: np.ndarray

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise DepthMismatch("hierarchy depth must be >= 1")
        n = hierarchy_size(self.depth)
        self.ados = np.ascontiguousarray(self.ados, dtype=complex)
        if self.ados.shape != (n, DIM, DIM):
            raise DepthMismatch(
                f"expected ados shape {(n, DIM, DIM)} for depth {self.depth}, "
                f"got {self.ados.shape}"
            )

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray, depth: int) -> "HierarchyState":
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (DIM, DIM):
            raise DepthMismatch(f"density matrix must be {DIM}x{DIM}, got {rho.shape}")
        ados = np.zeros((hierarchy_size(depth), DIM, DIM), dtype=complex)
        ados[0] = rho
        return cls(depth=depth, ados=ados)

    @property
    def rho(self) -> np.ndarray:
        """The reduced density matrix (zeroth ADO)."""
        return self.ados[0]

    def ado(self, n1: int, n2: int) -> np.ndarray:
        return self.ados[hierarchy_index(n1, n2, self.depth)]

    def copy(self) -> "HierarchyState":
        return HierarchyState(depth=self.depth, ados=self.ados.copy())


# ---------------------------------------------------------------------------
# superoperator helpers (reference path)

def superop_commutator(x: np.ndarray, target: np.ndarray, kind: str = "minus") -> np.ndarray:
    """[x, target] for kind "minus", {x, target} for kind "plus"."""
    x = np.asarray(x, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if x.shape != target.shape:
        raise DimensionMismatch(f"shape mismatch {x.shape} vs {target.shape}")
    if kind == "minus":
        return x @ target - target @ x
    if kind == "plus":
        return x @ target + target @ x
    raise ValueError(f"kind must be 'plus' or 'minus', got {kind!r}")


def g_superop(bath: BathSpec, target: np.ndarray, qubit_index: int = 1) -> np.ndarray:
    """Down-coupling superoperator (2/beta - gamma delta) [X, .] - i gamma {X, .}.

    The coupling operator is picked by ``qubit_index`` since a bath spec alone
    does not know which qubit it attaches to.
    """
    x = coupling_operator(qubit_index)
    c, _ = correlation_constants(bath)
    return c.real * superop_commutator(x, target) - 1j * bath.gamma * superop_commutator(x, target, "plus")


def heom_rhs(state: HierarchyState, model: ModelSpec) -> HierarchyState:
    """Time derivative of a hierarchy state (reference implementation).

    Straightforward vectorized translation of the equations of motion in the
    physical normalization; the compiled kernel used by the integrator is
    cross-checked against this and against an independent dense generator.
    """
    h = system_hamiltonian(model.system)
    ados = state.ados
    n = ados.shape[0]
    labels = hierarchy_labels(state.depth)
    up1, up2, dn1, dn2 = neighbor_tables(state.depth)
    pad = np.concatenate([ados, np.zeros((1, DIM, DIM), dtype=complex)])

    out = -1j * (h @ ados - ados @ h)
    for k, bath in enumerate(model.baths):
        x = coupling_operator(k + 1)
        c, delta = correlation_constants(bath)
        nl = labels[:, k].astype(float)
        out -= (bath.gamma * nl)[:, None, None] * ados
        comm = x @ ados - ados @ x
        out -= bath.lambda_b * delta * (x @ comm - comm @ x)
        zup = pad[up1 if k == 0 else up2]
        out -= 1j * bath.lambda_b * (x @ zup - zup @ x)
        zdn = pad[np.where((dn1 if k == 0 else dn2) >= 0, dn1 if k == 0 else dn2, n)]
        gdn = c.real * (x @ zdn - zdn @ x) - 1j * bath.gamma * (x @ zdn + zdn @ x)
        out -= 1j * nl[:, None, None] * gdn
    return HierarchyState(depth=state.depth, ados=out)


# ---------------------------------------------------------------------------
# integrator configuration and plan

@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings and steady-state detection thresholds."""

    depth: int = 50
    dt: float = 0.005
    t_max: float = 6000.0
    steady_tol: float = 1e-7
    steady_window: float | None = None  # 10 / min(gamma) when None
    rescale: bool = True
    blowup_norm: float = 1e12
    observer_stride: int = 1000

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be > 0")
        if self.steady_tol <= 0.0:
            raise ValueError("steady_tol must be > 0")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be >= 1")

    def window(self, model: ModelSpec) -> float:
        if self.steady_window is not None:
            return self.steady_window
        return 10.0 / min(model.bath1.gamma, model.bath2.gamma)


class _Plan:
    """Precomputed kernel arrays for one (model, depth, rescale) combination."""

    def __init__(self, model: ModelSpec, depth: int, rescale: bool):
        self.model = model
        self.depth = depth
        self.rescale = rescale
        self.n = hierarchy_size(depth)
        labels = hierarchy_labels(depth)
        self.labels = labels
        self.up1, self.up2, self.dn1, self.dn2 = neighbor_tables(depth)

        p = pointer_basis().kets
        self.p = p
        self.hp = np.ascontiguousarray(p.conj().T @ system_hamiltonian(model.system) @ p)

        x1 = np.array([1.0, 1.0, -1.0, -1.0])
        x2 = np.array([1.0, -1.0, 1.0, -1.0])
        self.d1 = np.ascontiguousarray(x1[:, None] - x1[None, :])
        self.a1 = np.ascontiguousarray(x1[:, None] + x1[None, :])
        self.d2 = np.ascontiguousarray(x2[:, None] - x2[None, :])
        self.a2 = np.ascontiguousarray(x2[:, None] + x2[None, :])

        ew = np.zeros((DIM, DIM))
        coeffs = []
        for k, bath in enumerate(model.baths):
            c, delta = correlation_constants(bath)
            d = self.d1 if k == 0 else self.d2
            ew += bath.lambda_b * delta * d * d
            nl = labels[:, k].astype(float)
            kup = np.sqrt(nl + 1.0) if rescale else np.ones(self.n)
            kdn = np.sqrt(nl) if rescale else nl
            upc = -1j * bath.lambda_b * kup
            upc[(self.up1 if k == 0 else self.up2) == self.n] = 0.0
            coeffs.append(
                (
                    np.ascontiguousarray(upc, dtype=complex),
                    np.ascontiguousarray(-1j * kdn * c.real, dtype=complex),
                    np.ascontiguousarray(-kdn * bath.gamma + 0j, dtype=complex),
                )
            )
        self.ew = np.ascontiguousarray(ew)
        (self.upc1, self.dc1, self.da1), (self.upc2, self.dc2, self.da2) = coeffs

        damp = (
            model.bath1.gamma * labels[:, 0].astype(float)
            + model.bath2.gamma * labels[:, 1].astype(float)
        )
        self.damp = np.ascontiguousarray(damp)

        if rescale:
            logs = [math.lgamma(k + 1.0) for k in range(depth + 1)]
            self.scale = np.exp(
                0.5 * np.array([logs[a] + logs[b] for a, b in labels])
            )
        else:
            self.scale = np.ones(self.n)

    def to_kernel(self, state: HierarchyState) -> np.ndarray:
        """Physical z basis -> padded, scaled, pointer-basis stack."""
        if state.depth != self.depth:
            raise DepthMismatch(f"state depth {state.depth} != plan depth {self.depth}")
        v = np.zeros((self.n + 1, DIM, DIM), dtype=complex)
        v[: self.n] = (self.p.conj().T @ state.ados @ self.p) / self.scale[:, None, None]
        return np.ascontiguousarray(v)

    def from_kernel(self, v: np.ndarray) -> HierarchyState:
        ados = (v[: self.n] * self.scale[:, None, None])
        ados = self.p @ ados @ self.p.conj().T
        return HierarchyState(depth=self.depth, ados=ados)

    def rho_from_kernel(self, v: np.ndarray) -> np.ndarray:
        """Reduced state only (scale of the zeroth member is 1)."""
        return self.p @ v[0] @ self.p.conj().T

    def rhs_args(self):
        return (
            self.hp, self.ew, self.damp,
            self.up1, self.up2, self.dn1, self.dn2,
            self.upc1, self.upc2, self.dc1, self.da1, self.dc2, self.da2,
            self.d1, self.a1, self.d2, self.a2,
        )


def kernel_rhs(state: HierarchyState, model: ModelSpec, rescale: bool = False) -> HierarchyState:
    """Apply the compiled RHS once (testing hook; physical in, physical out)."""
    plan = _Plan(model, state.depth, rescale)
    v = plan.to_kernel(state)
    out = np.zeros_like(v)
    _kernel.hierarchy_rhs(out, v, *plan.rhs_args())
    return plan.from_kernel(out)


# ---------------------------------------------------------------------------
# automatic integrator settings

# spectral-radius safety factor and cap for the automatic step size
DT_SAFETY = 2.0
DT_CAP = 0.05


def estimate_spectral_radius(model: ModelSpec, depth: int, rescale: bool = True,
                             iters: int = 100) -> float:
    """Deterministic power-iteration estimate of the generator spectral radius."""
    plan = _Plan(model, depth, rescale)
    n = plan.n
    rng = np.random.default_rng(12345)
    v = np.zeros((n + 1, 4, 4), dtype=complex)
    v[:n] = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
    v[:n] /= math.sqrt(float((np.abs(v[:n]) ** 2).sum()))
    out = np.zeros_like(v)
    r = 1.0
    for _ in range(iters):
        _kernel.hierarchy_rhs(out, v, *plan.rhs_args())
        r = math.sqrt(float((np.abs(out[:n]) ** 2).sum()))
        if r == 0.0:
            return 1.0
        v[:n] = out[:n] / r
    return r


def auto_depth(lambda_b: float) -> int:
    """Truncation level giving steady-state error far below plot resolution.

    Deeper hierarchies are needed as the coupling grows; the table keeps the
    residual truncation error around 1e-5 in trace distance (checked against
    generator null spaces at higher depth) while keeping weak-coupling points
    shallow. Shallow is not just cheaper there: the stationary magnitudes of
    the deep members grow as the coupling shrinks, and an over-deep hierarchy
    at weak coupling can transiently cross the blowup guard even though the
    evolution is stable.
    """
    if lambda_b <= 0.0:
        return 1
    for bound, depth in ((0.02, 8), (0.05, 12), (0.12, 15), (0.3, 20), (0.8, 25)):
        if lambda_b <= bound:
            return depth
    return 30


def auto_dt(model: ModelSpec, depth: int, rescale: bool = True) -> float:
    """Largest safe RK4 step for this hierarchy.

    The steady state is a fixed point of the update map at any stable step
    size, so dt is chosen against the stability boundary (safety factor over
    the measured spectral radius) rather than against transient accuracy,
    and capped to keep time resolution of the detection window.
    """
    r = estimate_spectral_radius(model, depth, rescale)
    return min(DT_SAFETY / r, DT_CAP)


# ---------------------------------------------------------------------------
# propagation

_DT_GUIDE = "dt above 1/(10 max(omega0, lambda_s, 10 lambda_b, gamma)); transient accuracy degrades"


def _check_dt_guide(model: ModelSpec, dt: float) -> None:
    scale = max(
        model.system.omega0,
        model.system.lambda_s,
        10.0 * max(model.bath1.lambda_b, model.bath2.lambda_b),
        model.bath1.gamma,
        model.bath2.gamma,
    )
    if scale > 0.0 and dt > 1.0 / (10.0 * scale):
        warnings.warn(_DT_GUIDE, RuntimeWarning, stacklevel=3)


@dataclass
class PropagateResult:
    hierarchy: HierarchyState
    t: float
    n_steps: int
    max_ado_norm: float


@dataclass
class SteadyStateResult:
    hierarchy: HierarchyState
    rho: np.ndarray
    t_converged: float
    converged: bool
    n_steps: int
    residual: float
    max_ado_norm: float


def _coerce_initial(initial, depth: int) -> HierarchyState:
    if isinstance(initial, HierarchyState):
        return initial
    return HierarchyState.from_density_matrix(np.asarray(initial, dtype=complex), depth)


def _buffers(n: int):
    shape = (n + 1, DIM, DIM)
    return tuple(np.zeros(shape, dtype=complex) for _ in range(5))


def propagate(
    initial,
    model: ModelSpec,
    config: IntegratorConfig,
    observer=None,
) -> PropagateResult:
    """Integrate the hierarchy for t_max with fixed-step classic RK4.

    ``initial`` is a 4x4 density matrix (fresh hierarchy) or a HierarchyState
    (resume). ``observer(t, state)`` is called after every ``observer_stride``
    steps and at the final step with the physical-normalization state.
    Raises NumericalBlowup if any ADO magnitude exceeds ``blowup_norm``.
    """
    _check_dt_guide(model, config.dt)
    state = _coerce_initial(initial, config.depth)
    plan = _Plan(model, config.depth, config.rescale)
    v = plan.to_kernel(state)
    bufs = _buffers(plan.n)
    n_total = int(round(config.t_max / config.dt))
    done = 0
    mx = float(np.abs(v).max())
    if observer is not None:
        observer(0.0, plan.from_kernel(v))
    while done < n_total:
        chunk = min(config.observer_stride, n_total - done)
        mx = _kernel.rk4_steps(v, *plan.rhs_args(), config.dt, chunk, *bufs)
        done += chunk
        t = done * config.dt
        if not np.isfinite(mx) or mx > config.blowup_norm:
            raise NumericalBlowup(f"ADO norm {mx:.3e} at t = {t:.3f}")
        if observer is not None:
            observer(t, plan.from_kernel(v))
    return PropagateResult(
        hierarchy=plan.from_kernel(v), t=n_total * config.dt, n_steps=n_total, max_ado_norm=mx
    )


def find_steady_state(
    initial,
    model: ModelSpec,
    config: IntegratorConfig,
) -> SteadyStateResult:
    """Integrate until the reduced state stops moving, or t_max.

    Convergence criterion: trace_distance(rho(t), rho(t - window)) below
    ``steady_tol``, checked on quarter-window snapshots. On t_max without
    convergence the best (final) state is returned with ``converged=False``.
    """
    _check_dt_guide(model, config.dt)
    state = _coerce_initial(initial, config.depth)
    plan = _Plan(model, config.depth, config.rescale)
    v = plan.to_kernel(state)
    bufs = _buffers(plan.n)

    window = config.window(model)
    snap_steps = max(1, int(round(0.25 * window / config.dt)))
    n_total = int(round(config.t_max / config.dt))

    snapshots: list[np.ndarray] = [hermitianize(plan.rho_from_kernel(v))]
    done = 0
    mx = float(np.abs(v).max())
    residual = math.inf
    converged = False
    while done < n_total:
        chunk = min(snap_steps, n_total - done)
        mx = _kernel.rk4_steps(v, *plan.rhs_args(), config.dt, chunk, *bufs)
        done += chunk
        t = done * config.dt
        if not np.isfinite(mx) or mx > config.blowup_norm:
            raise NumericalBlowup(f"ADO norm {mx:.3e} at t = {t:.3f}")
        rho_now = hermitianize(plan.rho_from_kernel(v))
        snapshots.append(rho_now)
        if len(snapshots) > 5:
            snapshots.pop(0)
        if chunk == snap_steps and len(snapshots) == 5:
            residual = trace_distance(rho_now, snapshots[0])
            if residual < config.steady_tol:
                converged = True
                break
    hierarchy = plan.from_kernel(v)
    return SteadyStateResult(
        hierarchy=hierarchy,
        rho=hermitianize(hierarchy.rho),
        t_converged=done * config.dt,
        converged=converged,
        n_steps=done,
        residual=float(residual),
        max_ado_norm=mx,
    )


# ---------------------------------------------------------------------------
# checkpointing

def model_fingerprint(model: ModelSpec, depth: int) -> bytes:
    """sha256 over the round-trip reprs of every physical parameter."""
    parts = [f"depth={depth}"]
    parts.append(f"omega0={model.system.omega0!r}")
    parts.append(f"lambda_s={model.system.lambda_s!r}")
    for tag, bath in (("b1", model.bath1), ("b2", model.bath2)):
        parts.append(f"{tag}=({bath.lambda_b!r},{bath.gamma!r},{bath.temperature!r})")
    return hashlib.sha256(";".join(parts).encode()).digest()


_HEADER = struct.Struct("<8sIIIQd32s")


def save_checkpoint(path, state: HierarchyState, t: float, model: ModelSpec) -> None:
    """Write a versioned little-endian binary checkpoint of a hierarchy."""
    fp = model_fingerprint(model, state.depth)
    header = _HEADER.pack(
        CHECKPOINT_MAGIC, CHECKPOINT_VERSION, state.depth, DIM,
        state.ados.shape[0], float(t), fp,
    )
    data = np.ascontiguousarray(state.ados, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_checkpoint(path, model: ModelSpec | None = None) -> tuple[HierarchyState, float]:
    """Read a checkpoint; verifies the fingerprint when ``model`` is given."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CheckpointError("truncated header")
        magic, version, depth, dim, n_ados, t, fp = _HEADER.unpack(raw)
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError("bad magic")
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported version {version}")
        if dim != DIM or n_ados != hierarchy_size(depth):
            raise CheckpointError("inconsistent dimensions")
        if model is not None and model_fingerprint(model, depth) != fp:
            raise CheckpointError("checkpoint belongs to different parameters")
        payload = fh.read()
    expect = n_ados * DIM * DIM * 16
    if len(payload) != expect:
        raise CheckpointError("truncated payload")
    ados = np.frombuffer(payload, dtype="<c16").reshape(n_ados, DIM, DIM)
    return HierarchyState(depth=depth, ados=ados.astype(complex)), t
