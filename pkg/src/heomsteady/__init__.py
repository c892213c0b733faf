"""Exact steady states of two qubits, each strongly coupled to its own bath.

The hierarchy engine propagates the coupled-qubit density matrix together
with its bath-correlation members to the long-time fixed point, and the
surrounding modules compare that state against the Gibbs state and its
pointer-basis projection, compute bath-resolved heat currents, and package
coupling sweeps as CSV plus JSON artifacts.
"""

__version__ = "0.1.0"

from .model import (
    BathSpec,
    ModelSpec,
    SystemSpec,
    default_model,
    energy_eigensystem,
    gibbs_state,
    pointer_basis,
    pointer_limit_diagonals,
    pointer_projected_gibbs,
)
from .heom import (
    HierarchyState,
    IntegratorConfig,
    NumericalBlowup,
    auto_depth,
    auto_dt,
    find_steady_state,
    propagate,
)
from .observables import ObservableRecord, heat_current, reconstruct_eta, record
from .qstate import fidelity, trace_distance, von_neumann_entropy
from .runner import (
    ConfigError,
    RelaxConfig,
    SweepConfig,
    run_equilibrium_sweep,
    run_ness_sweep,
    run_relax,
    run_verify,
)

__all__ = [
    "BathSpec",
    "ConfigError",
    "HierarchyState",
    "IntegratorConfig",
    "ModelSpec",
    "NumericalBlowup",
    "ObservableRecord",
    "RelaxConfig",
    "SweepConfig",
    "SystemSpec",
    "auto_depth",
    "auto_dt",
    "default_model",
    "energy_eigensystem",
    "fidelity",
    "find_steady_state",
    "gibbs_state",
    "heat_current",
    "pointer_basis",
    "pointer_limit_diagonals",
    "pointer_projected_gibbs",
    "propagate",
    "reconstruct_eta",
    "record",
    "run_equilibrium_sweep",
    "run_ness_sweep",
    "run_relax",
    "run_verify",
    "trace_distance",
    "von_neumann_entropy",
    "__version__",
]
