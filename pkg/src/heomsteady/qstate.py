"""Density-matrix primitives: eigensystems, entropy, fidelity, distances.

Conventions used throughout the package:

* states are numpy ``complex128`` arrays, square, unit trace;
* eigensystems are returned with eigenvalues ascending and eigenvectors as
  columns;
* every eigenvector is phase-fixed so that its largest-magnitude component is
  real and positive, and degenerate clusters are re-orthonormalized against
  the canonical basis ordering, so repeated calls (and different LAPACK
  builds) give identical bases.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10
NEGATIVE_EIGENVALUE_TOL = -1e-8
ENTROPY_CUTOFF = 1e-14
DEGENERACY_TOL = 1e-9
ORTHONORMALITY_TOL = 1e-12


class NotHermitian(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


@dataclass(frozen=True, eq=False)
class Basis:
    """Orthonormal set of kets, stored as the columns of ``kets``."""

    kets: np.ndarray

    def __post_init__(self) -> None:
        k = np.asarray(self.kets, dtype=complex)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DimensionMismatch(f"kets must form a square matrix, got {k.shape}")
        gram = k.conj().T @ k
        dev = np.abs(gram - np.eye(k.shape[0])).max()
        if dev > ORTHONORMALITY_TOL:
            raise ValueError(f"kets not orthonormal: max |<i|j> - delta_ij| = {dev:.3e}")
        object.__setattr__(self, "kets", k)

    @property
    def dim(self) -> int:
        return self.kets.shape[0]

    def ket(self, i: int) -> np.ndarray:
        return self.kets[:, i]


def _as_square(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def _require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    dev = np.abs(a - a.conj().T).max()
    if dev > tol:
        raise NotHermitian(f"max |A - A^dag| = {dev:.3e} exceeds {tol:.1e}")


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^dag)/2."""
    a = _as_square(a)
    return 0.5 * (a + a.conj().T)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    piv = v[k]
    mag = abs(piv)
    if mag == 0.0:
        return v
    return v * (piv.conjugate() / mag)


def hermitian_eigensystem(
    mat: np.ndarray, degeneracy_tol: float = DEGENERACY_TOL
) -> tuple[np.ndarray, Basis]:
    """Eigenvalues (ascending) and a deterministic eigenbasis of a Hermitian matrix.

    Within a degenerate cluster (consecutive eigenvalue gaps below
    ``degeneracy_tol``) LAPACK's arbitrary basis rotation is replaced by
    Gram-Schmidt on the projections of the canonical basis vectors, taken in
    order, so ties (e.g. equal level splittings) resolve reproducibly.
    """
    a = _as_square(mat)
    _require_hermitian(a)
    evals, vecs = np.linalg.eigh(a)
    n = a.shape[0]
    out = np.array(vecs, dtype=complex)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] < degeneracy_tol:
            stop += 1
        if stop - start > 1:
            out[:, start:stop] = _canonical_cluster_basis(vecs[:, start:stop])
        start = stop
    for j in range(n):
        out[:, j] = _fix_phase(out[:, j])
    return evals, Basis(kets=out)


def _canonical_cluster_basis(cluster: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(cluster columns).

    Projects canonical basis vectors onto the subspace in index order and
    Gram-Schmidts the results, keeping the first linearly independent ones.
    """
    n, k = cluster.shape
    proj = cluster @ cluster.conj().T
    basis: list[np.ndarray] = []
    for j in range(n):
        if len(basis) == k:
            break
        w = proj[:, j].copy()
        for b in basis:
            w -= b * (b.conj() @ w)
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            basis.append(w / norm)
    if len(basis) != k:
        # fall back to the LAPACK basis; cannot happen for a true projector
        return cluster
    return np.array(basis).T


def hermitian_sqrt(rho: np.ndarray) -> np.ndarray:
    """Matrix square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in [NEGATIVE_EIGENVALUE_TOL, 0) are clipped to zero; anything
    more negative raises ValueError.
    """
    a = _as_square(rho)
    _require_hermitian(a)
    evals, vecs = np.linalg.eigh(a)
    if evals.min() < NEGATIVE_EIGENVALUE_TOL:
        raise ValueError(f"matrix has eigenvalue {evals.min():.3e} < {NEGATIVE_EIGENVALUE_TOL:.1e}")
    w = np.sqrt(np.clip(evals, 0.0, None))
    return (vecs * w) @ vecs.conj().T


def von_neumann_entropy(rho: np.ndarray, cutoff: float = ENTROPY_CUTOFF) -> float:
    """S(rho) = -Tr rho ln rho, with eigenvalues below ``cutoff`` dropped."""
    a = _as_square(rho, "rho")
    _require_hermitian(a)
    evals = np.linalg.eigvalsh(a)
    p = evals[evals > cutoff]
    return float(-(p * np.log(p)).sum())


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Evaluated as the squared nuclear norm of sqrt(rho) sqrt(sigma), which is
    the same number but stays accurate and symmetric for rank-deficient
    states. For commuting states it reduces to (sum_i sqrt(p_i q_i))^2.
    """
    a = _as_square(rho, "rho")
    b = _as_square(sigma, "sigma")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    root = np.linalg.svd(hermitian_sqrt(a) @ hermitian_sqrt(b), compute_uv=False).sum()
    return float(min(root * root, 1.0 + 1e-12))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """T(rho, sigma) = (1/2) sum |eigenvalues of rho - sigma|."""
    a = _as_square(rho, "rho")
    b = _as_square(sigma, "sigma")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    _require_hermitian(d)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(d)).sum())


def purity(rho: np.ndarray) -> float:
    """Tr rho^2."""
    a = _as_square(rho, "rho")
    return float(np.trace(a @ a).real)


def assert_density_matrix(
    rho: np.ndarray,
    trace_tol: float = 1e-8,
    herm_tol: float = HERMITICITY_TOL,
    eig_tol: float = NEGATIVE_EIGENVALUE_TOL,
) -> None:
    """Raise if ``rho`` is not a valid density matrix within tolerances."""
    a = _as_square(rho, "rho")
    tr = np.trace(a)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr} deviates from 1 by more than {trace_tol:.1e}")
    dev = np.abs(a - a.conj().T).max()
    if dev > herm_tol:
        raise NotHermitian(f"max |rho - rho^dag| = {dev:.3e}")
    emin = np.linalg.eigvalsh(hermitianize(a)).min()
    if emin < eig_tol:
        raise ValueError(f"negative eigenvalue {emin:.3e}")
