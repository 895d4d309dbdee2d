"""Dense complex matrix kernel with explicit tolerance semantics.

All physics layers funnel their linear algebra through this module so that
tolerances and failure modes (singular propagator, non-positive metric, ...)
are decided in exactly one place. Matrices are plain square complex numpy
arrays; vectors are 1-d complex arrays. Every function is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EigenConvergenceError,
    NotHermitianError,
    NotPositiveDefiniteError,
    SingularMatrixError,
)

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "IDENTITY2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "as_matrix",
    "as_vector",
    "mul",
    "adjoint",
    "commutator",
    "inverse",
    "cholesky_upper",
    "eigenvalues",
    "sorted_eigenvalues",
    "eigenvalue_match_distance",
    "hermitian_deviation",
    "min_eig_hermitian",
    "frobenius",
]


@dataclass(frozen=True)
class Tolerance:
    """One tolerance record injected everywhere; never hard-coded per call site.

    condition_cap bounds the accepted condition number of inverses: near an
    exceptional point the vielbein and propagators become ill-conditioned and
    failures must be loud, not silent.
    """

    atol: float = 1e-12
    rtol: float = 1e-9
    condition_cap: float = 1e12

    def __post_init__(self):
        if self.atol < 0 or self.rtol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.atol + self.rtol == 0:
            raise ValueError("atol + rtol must be positive")
        if self.condition_cap <= 1:
            raise ValueError("condition_cap must exceed 1")


DEFAULT_TOL = Tolerance()

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a square, finite, complex 2-d array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    m = np.asarray(v, dtype=complex)
    if m.ndim != 1 or m.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be 1-d, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return m


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


def mul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def commutator(a, b) -> np.ndarray:
    return mul(a, b) - mul(b, a)


def inverse(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Matrix inverse, refusing condition numbers above the configured cap."""
    a = as_matrix(a)
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= 0 or svals[0] / svals[-1] > tol.condition_cap:
        raise SingularMatrixError(
            f"condition number exceeds cap {tol.condition_cap:.1e} "
            f"(sigma_min={svals[-1]:.3e}, sigma_max={svals[0]:.3e})"
        )
    return np.linalg.inv(a)


def hermitian_deviation(a) -> float:
    """Relative Frobenius distance of a from its own adjoint."""
    a = as_matrix(a)
    return frobenius(a - a.conj().T) / max(1.0, frobenius(a))


def _require_hermitian(g: np.ndarray, tol: Tolerance, what: str) -> np.ndarray:
    if hermitian_deviation(g) > tol.atol + tol.rtol:
        raise NotHermitianError(
            f"{what}: hermitian deviation {hermitian_deviation(g):.3e} "
            f"exceeds {tol.atol + tol.rtol:.3e}"
        )
    # Symmetrize so downstream LAPACK calls see an exactly Hermitian input.
    return 0.5 * (g + g.conj().T)


def cholesky_upper(g, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Upper-triangular factor E with positive real diagonal and adj(E) @ E == g.

    This is the gauge fixing for the vielbein: any unitary multiple of E is an
    equally valid factor, but the upper Cholesky factor is unique, which makes
    downstream comparisons deterministic.
    """
    g = as_matrix(g, "metric")
    h = _require_hermitian(g, tol, "cholesky_upper")
    try:
        lower = np.linalg.cholesky(h)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"cholesky_upper: {exc}") from exc
    return lower.conj().T


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues with algebraic multiplicity, no ordering guarantee."""
    a = as_matrix(a)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc


def sorted_eigenvalues(a) -> np.ndarray:
    """Eigenvalues sorted lexicographically by (real, imag)."""
    vals = eigenvalues(a)
    return vals[np.lexsort((vals.imag, vals.real))]


def eigenvalue_match_distance(a, b) -> float:
    """Max pairwise distance after sorted lexicographic matching."""
    va = sorted_eigenvalues(a)
    vb = sorted_eigenvalues(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError("spectra have different sizes")
    return float(np.max(np.abs(va - vb)))


def min_eig_hermitian(g, tol: Tolerance = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix (positive-definiteness monitor)."""
    g = as_matrix(g, "metric")
    h = _require_hermitian(g, tol, "min_eig_hermitian")
    try:
        return float(np.linalg.eigvalsh(h)[0])
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
