"""Sweep artifacts as the renderer sees them: a CSV table plus JSON sidecar.

These files are the single source of truth. Reference values (thermal states,
pointer anchors, entropies, effective-temperature states) are read from the
sidecar's overlay blocks, never recomputed here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class SchemaMismatch(ValueError):
    """CSV or sidecar does not match the expected sweep artifact layout."""


class MissingOverlayData(ValueError):
    """A requested reference overlay is absent from the sidecar."""


def _expected_columns() -> list:
    cols = ["lambda_b", "t_converged", "converged"]
    for basis in ("energy", "pointer"):
        for i in range(1, 5):
            for j in range(1, 5):
                cols.append(f"re_{basis}_{i}{j}")
                cols.append(f"im_{basis}_{i}{j}")
    cols += ["entropy", "fidelity_gibbs", "fidelity_pointer", "j1", "j2"]
    return cols


EXPECTED_COLUMNS = _expected_columns()


@dataclass
class SweepArtifact:
    csv_path: Path
    columns: dict
    sidecar: dict

    @property
    def lambda_grid(self) -> np.ndarray:
        return self.columns["lambda_b"]

    @property
    def n_points(self) -> int:
        return len(self.columns["lambda_b"])

    def matrix(self, basis: str, part: str = "re") -> np.ndarray:
        """Stacked 4x4 basis-resolved states, shape (n_points, 4, 4)."""
        if basis not in ("energy", "pointer") or part not in ("re", "im"):
            raise SchemaMismatch(f"no matrix columns for {part}_{basis}")
        out = np.empty((self.n_points, 4, 4))
        for i in range(4):
            for j in range(4):
                out[:, i, j] = self.columns[f"{part}_{basis}_{i + 1}{j + 1}"]
        return out

    def overlay_state(self, name: str, basis: str) -> np.ndarray:
        """A reference state's real part in the given basis, from the sidecar."""
        block = self.overlays()
        if name not in block:
            raise MissingOverlayData(f"sidecar overlays have no {name!r} block")
        return np.asarray(block[name][basis]["re"], dtype=float)

    def overlays(self) -> dict:
        block = self.sidecar.get("overlays")
        if not block:
            raise MissingOverlayData(f"no overlays block in sidecar for {self.csv_path}")
        return block

    def overlay_scalar(self, key: str) -> float:
        block = self.overlays()
        if key not in block:
            raise MissingOverlayData(f"sidecar overlays have no {key!r} value")
        return float(block[key])

    def efftemp_states(self) -> np.ndarray:
        """Equilibrium pointer-basis states at the effective temperature.

        Aligned with the lambda grid; shape (n_points, 4, 4), real part.
        """
        eff = self.sidecar.get("efftemp")
        if not eff:
            raise MissingOverlayData(
                f"no effective-temperature block in sidecar for {self.csv_path}"
            )
        points = eff.get("points", [])
        if len(points) != self.n_points:
            raise SchemaMismatch(
                f"efftemp block has {len(points)} points, CSV has {self.n_points}"
            )
        out = np.empty((self.n_points, 4, 4))
        for k, point in enumerate(points):
            if abs(point["lambda_b"] - self.lambda_grid[k]) > 1e-12 * max(
                1.0, self.lambda_grid[k]
            ):
                raise SchemaMismatch(
                    f"efftemp grid point {point['lambda_b']} does not match CSV "
                    f"lambda_b={self.lambda_grid[k]}"
                )
            out[k] = np.asarray(point["rho_pointer"]["re"], dtype=float)
        return out


def load_artifact(csv_path) -> SweepArtifact:
    """Read and validate one sweep CSV together with its JSON sidecar."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise SchemaMismatch(f"sweep CSV not found: {csv_path}")
    lines = csv_path.read_text().strip().split("\n")
    header = lines[0].split(",")
    if header != EXPECTED_COLUMNS:
        missing = [c for c in EXPECTED_COLUMNS if c not in header]
        extra = [c for c in header if c not in EXPECTED_COLUMNS]
        raise SchemaMismatch(
            f"{csv_path} does not match the sweep schema "
            f"(missing {missing or 'none'}, unexpected {extra or 'none'})"
        )
    raw = np.empty((len(lines) - 1, len(header)))
    for r, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaMismatch(f"{csv_path} row {r + 1} has {len(parts)} fields")
        try:
            raw[r] = [float(v) for v in parts]
        except ValueError as exc:
            raise SchemaMismatch(f"{csv_path} row {r + 1}: {exc}") from exc
    if raw.shape[0] == 0:
        raise SchemaMismatch(f"{csv_path} has no data rows")
    columns = {name: raw[:, k].copy() for k, name in enumerate(header)}

    sidecar_path = csv_path.with_suffix(".json")
    if not sidecar_path.exists():
        raise SchemaMismatch(f"sidecar not found: {sidecar_path}")
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    version = sidecar.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"{sidecar_path} has schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    return SweepArtifact(csv_path=csv_path, columns=columns, sidecar=sidecar)
