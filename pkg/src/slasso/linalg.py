"""Dense symmetric linear algebra kernels.

Everything downstream (column regressions, symmetrization, the simulation
harness) consumes these primitives. All routines are deterministic: fixed
sweep orders, fixed summation orders, no randomized pivoting. Matrices are
plain float64 ndarrays; symmetric results are bitwise symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, NotPositiveDefinite

_EPS = float(np.finfo(np.float64).eps)


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d float64 array and reject non-finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains NaN or infinite entries")
    return m


def as_sym_matrix(a, tol: float = 1e-8) -> np.ndarray:
    """Validate a square matrix as symmetric and return it bitwise symmetric.

    Asymmetry up to ``tol * max(1, max|a|)`` is folded away by averaging;
    anything larger raises ``ValueError``.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    if np.array_equal(m, m.T):
        return m
    gap = float(np.abs(m - m.T).max())
    scale = max(1.0, float(np.abs(m).max()))
    if gap > tol * scale:
        raise ValueError(f"matrix is not symmetric (max|a-a'| = {gap:.3e})")
    return (m + m.T) / 2.0


def mirror_upper(a: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one (exact symmetrization)."""
    return np.triu(a) + np.triu(a, 1).T


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted ascending with matching orthonormal eigenvectors.

    ``vectors[:, k]`` is the eigenvector for ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def sample_covariance(data, center: bool = False) -> np.ndarray:
    """Sample covariance X'X/n of an n-by-p data matrix.

    With ``center=False`` (the default) rows are taken as already mean
    zero; with ``center=True`` the column means are removed first, still
    with the 1/n normalization.
    """
    x = as_matrix(data)
    n = x.shape[0]
    if center:
        x = x - x.mean(axis=0)
    return mirror_upper(x.T @ x / n)


def cholesky(a) -> np.ndarray:
    """Lower-triangular L with LL' = a and strictly positive diagonal.

    Raises ``NotPositiveDefinite`` when a pivot falls at or below
    ``p * eps * max(diag a)``, the scale-invariant singularity threshold.
    """
    m = as_sym_matrix(a)
    p = m.shape[0]
    tol = p * _EPS * float(np.max(np.diag(m)))
    lower = np.zeros_like(m)
    for j in range(p):
        d = m[j, j] - lower[j, :j] @ lower[j, :j]
        if d <= tol:
            raise NotPositiveDefinite(
                f"pivot {d:.3e} at column {j} is at or below tolerance {tol:.3e}"
            )
        ljj = np.sqrt(d)
        lower[j, j] = ljj
        if j + 1 < p:
            lower[j + 1 :, j] = (m[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def solve_lower(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L y = rhs by forward substitution (rhs may be a matrix)."""
    y = np.array(rhs, dtype=np.float64)
    for i in range(lower.shape[0]):
        y[i] = (y[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    return y


def solve_lower_t(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L' x = rhs by backward substitution (rhs may be a matrix)."""
    x = np.array(rhs, dtype=np.float64)
    for i in range(lower.shape[0] - 1, -1, -1):
        x[i] = (x[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x


def invert_spd(a) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    m = as_sym_matrix(a)
    lower = cholesky(m)
    eye = np.eye(m.shape[0])
    inv = solve_lower_t(lower, solve_lower(lower, eye))
    return (inv + inv.T) / 2.0


def sym_eigen(a, max_sweeps: int = 50) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Sweeps rotate out the (i, j), i < j off-diagonal entries in fixed
    lexicographic order, so the result is deterministic for a given input.
    Raises ``NonConvergence`` if the off-diagonal has not collapsed after
    ``max_sweeps`` sweeps.
    """
    m = as_sym_matrix(a)
    p = m.shape[0]
    vec = np.eye(p)
    if p == 1:
        return EigenDecomposition(values=m[0, :1].copy(), vectors=vec)
    work = m.copy()
    scale = max(1.0, float(np.abs(work).max()))
    tol = 1e-12 * scale
    skip = 0.5 * tol
    for sweep in range(max_sweeps + 1):
        off = float(np.abs(work - np.diag(np.diag(work))).max())
        if off <= tol:
            break
        if sweep == max_sweeps:
            raise NonConvergence(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
            )
        for i in range(p - 1):
            for j in range(i + 1, p):
                apq = work[i, j]
                if abs(apq) <= skip:
                    continue
                tau = (work[j, j] - work[i, i]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                aii, ajj = work[i, i], work[j, j]
                row_i = work[i, :].copy()
                row_j = work[j, :].copy()
                new_i = c * row_i - s * row_j
                new_j = s * row_i + c * row_j
                work[i, :] = new_i
                work[:, i] = new_i
                work[j, :] = new_j
                work[:, j] = new_j
                work[i, i] = aii - t * apq
                work[j, j] = ajj + t * apq
                work[i, j] = 0.0
                work[j, i] = 0.0
                v_i = vec[:, i].copy()
                v_j = vec[:, j].copy()
                vec[:, i] = c * v_i - s * v_j
                vec[:, j] = s * v_i + c * v_j
    values = np.diag(work).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=vec[:, order])


def spectrum_norm(m) -> float:
    """Largest singular value, as sqrt of the top eigenvalue of m'm."""
    a = as_matrix(m)
    gram = mirror_upper(a.T @ a)
    top = float(sym_eigen(gram).values[-1])
    return float(np.sqrt(max(top, 0.0)))


def matrix_l1_norm(m) -> float:
    """Maximum absolute column sum (the l1 operator norm)."""
    return float(np.abs(as_matrix(m)).sum(axis=0).max())


def matrix_linf_norm(m) -> float:
    """Maximum absolute row sum (the l-infinity operator norm).

    Computed by running the column-sum kernel on the contiguous transpose,
    so for a bitwise-symmetric input it equals ``matrix_l1_norm`` bitwise.
    """
    return float(np.abs(np.ascontiguousarray(as_matrix(m).T)).sum(axis=0).max())


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries."""
    a = as_matrix(m)
    return float(np.sqrt(np.sum(a * a)))
