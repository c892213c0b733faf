"""Command-line entry points.

Exit codes: 0 success, 2 convergence or numerical failure, 3 bad
configuration, 4 verification failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .heom import NumericalBlowup
from .model import SystemSpec
from .runner import (
    ConfigError,
    RelaxConfig,
    SweepConfig,
    InitialState,
    default_lambda_grid,
    load_relax_config,
    load_sweep_config,
    run_equilibrium_sweep,
    run_ness_sweep,
    run_relax,
    run_verify,
)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG = 3
EXIT_VERIFY = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    p.add_argument("--out", type=Path, default=None, help="output directory override")
    p.add_argument("--parallelism", type=int, default=None, help="worker process count")
    p.add_argument("--depth", type=int, default=None, help="hierarchy depth override")
    p.add_argument("--dt", type=float, default=None, help="integrator step override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heomsteady",
        description="Steady states of two qubits strongly coupled to independent baths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("relax", "propagate one relaxation trajectory and record observables"),
        ("sweep-eq", "steady-state sweep over coupling at equal bath temperatures"),
        ("sweep-ness", "steady-state sweep with a temperature bias; records heat currents"),
        ("verify", "run the independent-oracle verification suite"),
    ):
        _add_common(sub.add_parser(name, help=text))
    return parser


def _default_sweep_config(ness: bool) -> SweepConfig:
    t1, t2 = (2.0, 1.0) if ness else (1.5, 1.5)
    return SweepConfig(
        system=SystemSpec(),
        gamma1=0.15,
        gamma2=0.15,
        temperature1=t1,
        temperature2=t2,
        lambda_grid=default_lambda_grid(),
        initial_states=(InitialState(kind="ground"),),
        depth=None,
        dt=None,
        t_max=6000.0,
        steady_tol=1e-7,
        steady_window=None,
        rescale=True,
        observer_stride=1000,
        output_dir=Path("out"),
        parallelism=1,
    )


def _apply_overrides(cfg, args):
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.depth is not None:
        changes["depth"] = args.depth
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.parallelism is not None and hasattr(cfg, "parallelism"):
        changes["parallelism"] = args.parallelism
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _cmd_sweep(args, ness: bool) -> int:
    if args.config is not None:
        cfg = load_sweep_config(args.config)
    else:
        cfg = _default_sweep_config(ness)
    cfg = _apply_overrides(cfg, args)
    result = run_ness_sweep(cfg) if ness else run_equilibrium_sweep(cfg)
    print(f"wrote {result.csv_path} and {result.sidecar_path}")
    if not result.all_converged:
        bad = [p["lambda_b"] for p in result.sidecar["points"] if not p["converged"]]
        print(f"not converged at lambda_b = {bad}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_relax(args) -> int:
    if args.config is None:
        raise ConfigError("relax requires --config (the bath coupling has no default)")
    cfg = _apply_overrides(load_relax_config(args.config), args)
    result = run_relax(cfg)
    print(f"wrote {result.csv_path} and {result.sidecar_path} ({len(result.rows)} samples)")
    return EXIT_OK


def _cmd_verify(args) -> int:
    ok, results = run_verify(output_dir=args.out)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: value={r.value:.6g} threshold={r.threshold:g} ({r.detail})")
    if args.out is not None:
        print(f"wrote {Path(args.out) / 'verify.json'}")
    print("verification " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "relax":
            return _cmd_relax(args)
        if args.command == "sweep-eq":
            return _cmd_sweep(args, ness=False)
        if args.command == "sweep-ness":
            return _cmd_sweep(args, ness=True)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowup as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
