"""Sweep orchestration: config files, steady-state sweeps, CSV/JSON artifacts.

A sweep is a list of independent steady-state computations over a common
coupling grid (both baths share lambda_b at every point). Each point is a
single-threaded propagation; points are distributed over a process pool and
re-assembled in grid order, so results do not depend on the parallelism
degree. Output is one fixed-schema CSV per sweep plus a JSON sidecar holding
the fully resolved configuration, a source hash, per-point integrator
settings, and the analytic reference states figures overlay on the data.
"""
from __future__ import annotations

import hashlib
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .heom import (
    HierarchyState,
    IntegratorConfig,
    auto_depth,
    auto_dt,
    find_steady_state,
    propagate,
)
from .model import (
    BathSpec,
    ModelSpec,
    SystemSpec,
    energy_eigensystem,
    gibbs_state,
    pointer_basis,
    pointer_limit_diagonals,
    pointer_projected_gibbs,
    system_hamiltonian,
)
from .observables import ObservableRecord, basis_resolved, record
from .qstate import assert_density_matrix, trace_distance, von_neumann_entropy

SCHEMA_VERSION = 1

DEFAULT_GRID_POINTS = 40
DEFAULT_GRID_RANGE = (0.01, 4.0)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _csv_columns() -> list[str]:
    cols = ["lambda_b", "t_converged", "converged"]
    for basis in ("energy", "pointer"):
        for i in range(1, 5):
            for j in range(1, 5):
                cols.append(f"re_{basis}_{i}{j}")
                cols.append(f"im_{basis}_{i}{j}")
    cols += ["entropy", "fidelity_gibbs", "fidelity_pointer", "j1", "j2"]
    return cols


CSV_COLUMNS = _csv_columns()


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class InitialState:
    """Named initial condition: ground | maximally_mixed | random_pure | explicit."""

    kind: str
    seed: int | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("ground", "maximally_mixed", "random_pure", "explicit"):
            raise ConfigError(f"unknown initial state kind {self.kind!r}")
        if self.kind == "random_pure" and self.seed is None:
            raise ConfigError("random_pure initial state needs a seed")
        if self.kind == "explicit":
            if self.matrix is None:
                raise ConfigError("explicit initial state needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (4, 4):
                raise ConfigError(f"explicit initial state must be 4x4, got {m.shape}")
            assert_density_matrix(m)
            object.__setattr__(self, "matrix", m)

    def resolve(self, model: ModelSpec) -> np.ndarray:
        if self.kind == "ground":
            _, basis = energy_eigensystem(model.system)
            g = basis.ket(0)
            return np.outer(g, g.conj())
        if self.kind == "maximally_mixed":
            return np.eye(4, dtype=complex) / 4.0
        if self.kind == "random_pure":
            rng = np.random.default_rng(self.seed)
            psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            psi /= np.linalg.norm(psi)
            return np.outer(psi, psi.conj())
        return self.matrix.copy()

    def describe(self):
        out = {"kind": self.kind}
        if self.seed is not None:
            out["seed"] = self.seed
        if self.matrix is not None:
            out["matrix"] = {"re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}
        return out


@dataclass(frozen=True)
class SweepConfig:
    """Resolved sweep settings; ``depth``/``dt`` of None mean per-point auto."""

    system: SystemSpec
    gamma1: float
    gamma2: float
    temperature1: float
    temperature2: float
    lambda_grid: tuple
    initial_states: tuple
    depth: int | None
    dt: float | None
    t_max: float
    steady_tol: float
    steady_window: float | None
    rescale: bool
    observer_stride: int
    output_dir: Path
    parallelism: int
    efftemp_reference: Path | None = None

    def __post_init__(self) -> None:
        g = self.lambda_grid
        if len(g) == 0:
            raise ConfigError("lambda grid is empty")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigError("lambda grid must be strictly increasing")
        if g[0] < 0.0:
            raise ConfigError("lambda grid values must be >= 0")
        if not self.initial_states:
            raise ConfigError("at least one initial state is required")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")

    def model_at(self, lambda_b: float) -> ModelSpec:
        return ModelSpec(
            system=self.system,
            bath1=BathSpec(lambda_b=lambda_b, gamma=self.gamma1, temperature=self.temperature1),
            bath2=BathSpec(lambda_b=lambda_b, gamma=self.gamma2, temperature=self.temperature2),
        )

    def describe(self):
        return {
            "system": {"omega0": self.system.omega0, "lambda_s": self.system.lambda_s},
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "temperature1": self.temperature1,
            "temperature2": self.temperature2,
            "lambda_grid": list(self.lambda_grid),
            "initial_states": [s.describe() for s in self.initial_states],
            "depth": self.depth if self.depth is not None else "auto",
            "dt": self.dt if self.dt is not None else "auto",
            "t_max": self.t_max,
            "steady_tol": self.steady_tol,
            "steady_window": self.steady_window,
            "rescale": self.rescale,
            "observer_stride": self.observer_stride,
            "parallelism": self.parallelism,
            "efftemp_reference": str(self.efftemp_reference) if self.efftemp_reference else None,
        }


@dataclass(frozen=True)
class RelaxConfig:
    """Single-trajectory settings: one model, one initial state."""

    system: SystemSpec
    lambda_b: float
    gamma1: float
    gamma2: float
    temperature1: float
    temperature2: float
    initial_state: InitialState
    depth: int | None
    dt: float | None
    t_max: float
    steady_tol: float
    steady_window: float | None
    rescale: bool
    observer_stride: int
    output_dir: Path

    def model(self) -> ModelSpec:
        return ModelSpec(
            system=self.system,
            bath1=BathSpec(lambda_b=self.lambda_b, gamma=self.gamma1, temperature=self.temperature1),
            bath2=BathSpec(lambda_b=self.lambda_b, gamma=self.gamma2, temperature=self.temperature2),
        )

    def describe(self):
        return {
            "system": {"omega0": self.system.omega0, "lambda_s": self.system.lambda_s},
            "lambda_b": self.lambda_b,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "temperature1": self.temperature1,
            "temperature2": self.temperature2,
            "initial_state": self.initial_state.describe(),
            "depth": self.depth if self.depth is not None else "auto",
            "dt": self.dt if self.dt is not None else "auto",
            "t_max": self.t_max,
            "steady_tol": self.steady_tol,
            "steady_window": self.steady_window,
            "rescale": self.rescale,
            "observer_stride": self.observer_stride,
        }


def _parse_initial(entry) -> InitialState:
    if isinstance(entry, str):
        return InitialState(kind=entry)
    if isinstance(entry, dict):
        kind = entry.get("kind")
        seed = entry.get("seed")
        matrix = None
        if "matrix_re" in entry or "matrix_im" in entry:
            re = np.asarray(entry.get("matrix_re", np.zeros((4, 4))), dtype=float)
            im = np.asarray(entry.get("matrix_im", np.zeros((4, 4))), dtype=float)
            matrix = re + 1j * im
        try:
            return InitialState(kind=kind, seed=seed, matrix=matrix)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad initial state entry: {exc}") from exc
    raise ConfigError(f"initial state entries must be strings or tables, got {type(entry).__name__}")


def _load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def _number(table, key, default, kind=float):
    val = table.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    return kind(val)


def _integrator_fields(table):
    depth = table.get("depth", "auto")
    if depth == "auto":
        depth = None
    elif not isinstance(depth, int) or depth < 1:
        raise ConfigError(f"depth must be a positive integer or 'auto', got {depth!r}")
    dt = table.get("dt", "auto")
    if dt == "auto":
        dt = None
    else:
        dt = _number(table, "dt", None)
        if dt is not None and dt <= 0:
            raise ConfigError("dt must be > 0")
    return {
        "depth": depth,
        "dt": dt,
        "t_max": _number(table, "t_max", 6000.0),
        "steady_tol": _number(table, "steady_tol", 1e-7),
        "steady_window": _number(table, "steady_window", None),
        "rescale": bool(table.get("rescale", True)),
        "observer_stride": _number(table, "observer_stride", 1000, int),
    }


def _bath_fields(table):
    gamma = _number(table, "gamma", 0.15)
    t = _number(table, "temperature", 1.5)
    return {
        "gamma1": _number(table, "gamma1", gamma),
        "gamma2": _number(table, "gamma2", gamma),
        "temperature1": _number(table, "temperature1", t),
        "temperature2": _number(table, "temperature2", t),
    }


def default_lambda_grid(points: int = DEFAULT_GRID_POINTS) -> tuple:
    lo, hi = DEFAULT_GRID_RANGE
    return tuple(np.geomspace(lo, hi, points).tolist())


def load_sweep_config(path) -> SweepConfig:
    """Parse a sweep TOML file into a fully validated SweepConfig."""
    raw = _load_toml(path)
    sys_tab = raw.get("system", {})
    system = SystemSpec(
        omega0=_number(sys_tab, "omega0", 1.0),
        lambda_s=_number(sys_tab, "lambda_s", 1.55),
    )
    sweep_tab = raw.get("sweep", {})
    if "lambda_grid" in sweep_tab:
        grid = tuple(float(x) for x in sweep_tab["lambda_grid"])
    else:
        grid = default_lambda_grid(int(sweep_tab.get("grid_points", DEFAULT_GRID_POINTS)))
    run_tab = raw.get("run", {})
    initials = tuple(_parse_initial(e) for e in run_tab.get("initial_states", ["ground"]))
    eff = run_tab.get("efftemp_reference")
    try:
        return SweepConfig(
            system=system,
            **_bath_fields(raw.get("baths", {})),
            lambda_grid=grid,
            initial_states=initials,
            **_integrator_fields(raw.get("integrator", {})),
            output_dir=Path(run_tab.get("output_dir", "out")),
            parallelism=_number(run_tab, "parallelism", 1, int),
            efftemp_reference=Path(eff) if eff else None,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_relax_config(path) -> RelaxConfig:
    raw = _load_toml(path)
    sys_tab = raw.get("system", {})
    system = SystemSpec(
        omega0=_number(sys_tab, "omega0", 1.0),
        lambda_s=_number(sys_tab, "lambda_s", 1.55),
    )
    baths = raw.get("baths", {})
    lam = _number(baths, "lambda_b", None)
    if lam is None:
        raise ConfigError("relax config needs baths.lambda_b")
    run_tab = raw.get("run", {})
    initial = _parse_initial(run_tab.get("initial_state", "ground"))
    try:
        return RelaxConfig(
            system=system,
            lambda_b=lam,
            **_bath_fields(baths),
            initial_state=initial,
            **_integrator_fields(raw.get("integrator", {})),
            output_dir=Path(run_tab.get("output_dir", "out")),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# automatic integrator resolution

def resolve_integrator(cfg, lambda_b: float) -> tuple[IntegratorConfig, dict]:
    model = cfg.model_at(lambda_b)
    depth = cfg.depth if cfg.depth is not None else auto_depth(lambda_b)
    dt = cfg.dt if cfg.dt is not None else auto_dt(model, depth, cfg.rescale)
    icfg = IntegratorConfig(
        depth=depth,
        dt=dt,
        t_max=cfg.t_max,
        steady_tol=cfg.steady_tol,
        steady_window=cfg.steady_window,
        rescale=cfg.rescale,
        observer_stride=cfg.observer_stride,
    )
    # transient-accuracy guide; irrelevant to the fixed point but recorded
    scale = max(cfg.system.omega0, cfg.system.lambda_s, 10.0 * lambda_b,
                cfg.gamma1, cfg.gamma2)
    guide_ok = scale <= 0.0 or dt <= 1.0 / (10.0 * scale)
    meta = {"lambda_b": lambda_b, "depth": depth, "dt": dt,
            "dt_guide_exceeded": not guide_ok}
    return icfg, meta


# ---------------------------------------------------------------------------
# sweep execution

def _steady_task(task):
    """Worker entry: one (grid point, initial state) propagation."""
    idx, init_idx, model, initial, icfg = task
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = find_steady_state(initial, model, icfg)
    return idx, init_idx, res


def _run_points(cfg: SweepConfig, models, icfgs):
    """All propagations of a sweep, grid-ordered, grouped per point."""
    tasks = []
    for i, model in enumerate(models):
        for k, init in enumerate(cfg.initial_states):
            tasks.append((i, k, model, init.resolve(model), icfgs[i]))
    results: dict = {}
    t0 = time.time()
    if cfg.parallelism == 1:
        for task in tasks:
            i, k, res = _steady_task(task)
            results[(i, k)] = res
            print(
                f"  point {i + 1}/{len(models)} init {k}: lambda_b={task[2].bath1.lambda_b:g} "
                f"t_conv={res.t_converged:g} converged={res.converged} "
                f"[{time.time() - t0:.1f}s]",
                file=sys.stderr,
            )
    else:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            for i, k, res in pool.map(_steady_task, tasks):
                results[(i, k)] = res
    grouped = []
    for i in range(len(models)):
        grouped.append([results[(i, k)] for k in range(len(cfg.initial_states))])
    return grouped


def _point_payload(cfg: SweepConfig, i: int, model, meta, group):
    primary = group[0]
    lam = cfg.lambda_grid[i]
    conv = all(r.converged for r in group)
    rec = record(primary.hierarchy, model, lam, primary.t_converged, conv)
    spread = 0.0
    for a in range(len(group)):
        for b in range(a + 1, len(group)):
            spread = max(spread, trace_distance(group[a].rho, group[b].rho))
    point = dict(meta)
    point.update(
        {
            "t_converged": primary.t_converged,
            "converged": conv,
            "n_steps": primary.n_steps,
            "residual": primary.residual,
            "initial_state_spread": spread,
            "degenerate": lam == 0.0,
        }
    )
    return rec, point


def run_equilibrium_sweep(cfg: SweepConfig) -> "SweepResult":
    """Steady state vs coupling at a common bath temperature."""
    if cfg.temperature1 != cfg.temperature2:
        raise ConfigError("equilibrium sweep requires equal bath temperatures")
    return _run_sweep(cfg, kind="equilibrium")


def run_ness_sweep(cfg: SweepConfig, t1: float | None = None, t2: float | None = None) -> "SweepResult":
    """Steady state vs coupling with a temperature bias; adds heat currents.

    The sidecar additionally carries, per grid point, the equilibrium
    pointer-basis state at the mean temperature (t1+t2)/2, either pulled from
    a referenced equilibrium sweep CSV or computed here.
    """
    if t1 is not None or t2 is not None:
        t1 = cfg.temperature1 if t1 is None else t1
        t2 = cfg.temperature2 if t2 is None else t2
        cfg = type(cfg)(**{**_cfg_dict(cfg), "temperature1": t1, "temperature2": t2})
    if cfg.temperature1 == cfg.temperature2:
        raise ConfigError("a temperature bias is required; use the equilibrium sweep otherwise")
    return _run_sweep(cfg, kind="ness")


def _cfg_dict(cfg: SweepConfig) -> dict:
    return {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}


def _run_sweep(cfg: SweepConfig, kind: str) -> "SweepResult":
    models = [cfg.model_at(lam) for lam in cfg.lambda_grid]
    resolved = [resolve_integrator(cfg, lam) for lam in cfg.lambda_grid]
    icfgs = [r[0] for r in resolved]
    metas = [r[1] for r in resolved]
    print(f"[sweep-{kind}] {len(models)} points, parallelism {cfg.parallelism}", file=sys.stderr)
    grouped = _run_points(cfg, models, icfgs)
    records, points = [], []
    for i, (model, meta, group) in enumerate(zip(models, metas, grouped)):
        rec, point = _point_payload(cfg, i, model, meta, group)
        records.append(rec)
        points.append(point)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    stem = "sweep_eq" if kind == "equilibrium" else "sweep_ness"
    csv_path = cfg.output_dir / f"{stem}.csv"
    sidecar_path = cfg.output_dir / f"{stem}.json"
    write_sweep_csv(csv_path, records)

    t_ref = 0.5 * (cfg.temperature1 + cfg.temperature2)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "package_version": __version__,
        "code_hash": source_hash(),
        "config": cfg.describe(),
        "points": points,
        "overlays": reference_overlays(cfg.system, t_ref),
    }
    if kind == "ness":
        sidecar["efftemp"] = _efftemp_block(cfg, t_ref)
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return SweepResult(
        records=records,
        csv_path=csv_path,
        sidecar_path=sidecar_path,
        sidecar=sidecar,
        all_converged=all(p["converged"] for p in points),
    )


@dataclass
class SweepResult:
    records: list
    csv_path: Path
    sidecar_path: Path
    sidecar: dict
    all_converged: bool


# ---------------------------------------------------------------------------
# effective-temperature reference for biased sweeps

def _efftemp_block(cfg: SweepConfig, t_ref: float) -> dict:
    if cfg.efftemp_reference is not None:
        return _efftemp_from_csv(cfg, t_ref)
    eq_points = []
    print(f"[sweep-ness] computing equilibrium reference at T={t_ref:g}", file=sys.stderr)
    for lam in cfg.lambda_grid:
        eq_cfg = type(cfg)(**{**_cfg_dict(cfg), "temperature1": t_ref, "temperature2": t_ref})
        model = eq_cfg.model_at(lam)
        icfg, _ = resolve_integrator(eq_cfg, lam)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = find_steady_state(cfg.initial_states[0].resolve(model), model, icfg)
        rp = basis_resolved(res.rho, pointer_basis())
        eq_points.append(
            {"lambda_b": lam, "rho_pointer": {"re": rp.real.tolist(), "im": rp.imag.tolist()}}
        )
    return {"temperature": t_ref, "source": "computed", "points": eq_points}


def _efftemp_from_csv(cfg: SweepConfig, t_ref: float) -> dict:
    path = cfg.efftemp_reference
    sidecar_path = path.with_suffix(".json")
    if sidecar_path.exists():
        with open(sidecar_path) as fh:
            ref_meta = json.load(fh)
        ref_t = ref_meta.get("config", {}).get("temperature1")
        if ref_t is not None and abs(ref_t - t_ref) > 1e-12:
            raise ConfigError(
                f"efftemp reference ran at T={ref_t}, needed T={t_ref}"
            )
    rows = read_sweep_csv(path)
    by_lam = {row["lambda_b"]: row for row in rows}
    eq_points = []
    for lam in cfg.lambda_grid:
        match = None
        for key in by_lam:
            if abs(key - lam) <= 1e-12 * max(1.0, lam):
                match = by_lam[key]
                break
        if match is None:
            raise ConfigError(f"efftemp reference has no grid point at lambda_b={lam}")
        re = [[match[f"re_pointer_{i}{j}"] for j in range(1, 5)] for i in range(1, 5)]
        im = [[match[f"im_pointer_{i}{j}"] for j in range(1, 5)] for i in range(1, 5)]
        eq_points.append({"lambda_b": lam, "rho_pointer": {"re": re, "im": im}})
    return {"temperature": t_ref, "source": str(path), "points": eq_points}


# ---------------------------------------------------------------------------
# relaxation trajectories

def run_relax(cfg: RelaxConfig) -> "RelaxResult":
    """Propagate one trajectory, recording all observables at the stride."""
    model = cfg.model()
    lam = cfg.lambda_b
    depth = cfg.depth if cfg.depth is not None else auto_depth(lam)
    dt = cfg.dt if cfg.dt is not None else auto_dt(model, depth, cfg.rescale)
    icfg = IntegratorConfig(
        depth=depth,
        dt=dt,
        t_max=cfg.t_max,
        steady_tol=cfg.steady_tol,
        steady_window=cfg.steady_window,
        rescale=cfg.rescale,
        observer_stride=cfg.observer_stride,
    )
    rows = []

    def observer(t, state):
        rows.append(record(state, model, lam, t, False))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = propagate(cfg.initial_state.resolve(model), model, icfg, observer=observer)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.output_dir / "relax.csv"
    sidecar_path = cfg.output_dir / "relax.json"
    write_sweep_csv(csv_path, rows)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "kind": "relax",
        "package_version": __version__,
        "code_hash": source_hash(),
        "config": cfg.describe(),
        "points": [{"lambda_b": lam, "depth": depth, "dt": dt, "n_steps": result.n_steps}],
        "overlays": reference_overlays(
            cfg.system, 0.5 * (cfg.temperature1 + cfg.temperature2)
        ),
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RelaxResult(rows=rows, csv_path=csv_path, sidecar_path=sidecar_path,
                       final_hierarchy=result.hierarchy)


@dataclass
class RelaxResult:
    rows: list
    csv_path: Path
    sidecar_path: Path
    final_hierarchy: HierarchyState


# ---------------------------------------------------------------------------
# verification

def run_verify(output_dir: Path | None = None) -> tuple[bool, list]:
    """Run every engine check; optionally write the report as JSON."""
    from .oracle import verify_all

    results = verify_all()
    ok = all(r.passed for r in results)
    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        report = {
            "schema_version": SCHEMA_VERSION,
            "kind": "verify",
            "package_version": __version__,
            "code_hash": source_hash(),
            "passed": ok,
            "checks": [r.as_dict() for r in results],
        }
        with open(output_dir / "verify.json", "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return ok, results


# ---------------------------------------------------------------------------
# artifacts

def _fmt(x: float) -> str:
    return "%.17g" % x


def record_row(rec: ObservableRecord) -> list[str]:
    row = [_fmt(rec.lambda_b), _fmt(rec.t_converged), "1" if rec.converged else "0"]
    for mat in (rec.rho_energy, rec.rho_pointer):
        for i in range(4):
            for j in range(4):
                row.append(_fmt(mat[i, j].real))
                row.append(_fmt(mat[i, j].imag))
    row += [_fmt(rec.entropy), _fmt(rec.fidelity_gibbs), _fmt(rec.fidelity_pointer),
            _fmt(rec.j1), _fmt(rec.j2)]
    return row


def write_sweep_csv(path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(record_row(rec)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[dict]:
    """Rows as column->float dicts; exact round-trip of written values."""
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    if header != CSV_COLUMNS:
        raise ConfigError(f"unexpected CSV schema in {path}")
    rows = []
    for line in text[1:]:
        parts = line.split(",")
        rows.append({col: float(val) for col, val in zip(header, parts)})
    return rows


def source_hash() -> str:
    """sha256 over the package sources, stable across runs of the same code."""
    digest = hashlib.sha256()
    pkg_dir = Path(__file__).parent
    for name in sorted(p.name for p in pkg_dir.glob("*.py")):
        digest.update(name.encode())
        digest.update((pkg_dir / name).read_bytes())
    return digest.hexdigest()


def reference_overlays(system: SystemSpec, temperature: float) -> dict:
    """Analytic reference states, resolved in both bases, for figure overlays."""
    beta = 1.0 / temperature
    h = system_hamiltonian(system)
    _, ebasis = energy_eigensystem(system)
    pbasis = pointer_basis()
    gibbs = gibbs_state(h, beta)
    plim = pointer_projected_gibbs(system, beta)
    lo, hi = pointer_limit_diagonals(system, beta)

    def both(mat):
        e = basis_resolved(mat, ebasis)
        p = basis_resolved(mat, pbasis)
        return {
            "energy": {"re": e.real.tolist(), "im": e.imag.tolist()},
            "pointer": {"re": p.real.tolist(), "im": p.imag.tolist()},
        }

    return {
        "temperature": temperature,
        "beta": beta,
        "gibbs": both(gibbs),
        "pointer_limit": both(plim),
        "pointer_limit_diagonals": [lo, hi],
        "gibbs_entropy": von_neumann_entropy(gibbs),
        "pointer_limit_entropy": von_neumann_entropy(plim),
        "max_entropy": math.log(4.0),
    }
