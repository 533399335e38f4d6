"""Covariance-form Lasso and the scaled-Lasso joint fit for one column.

The solver never sees a design matrix: everything is driven off a Gram
(covariance) matrix, with the target column's coefficient pinned at -1.
Coefficients and the noise level are estimated jointly by alternating an
exact noise-level update with a Lasso solve at the data-driven penalty,
which is exact alternating minimization of a jointly convex objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, NonConvergence
from .linalg import as_matrix, as_sym_matrix, mirror_upper

KKT_TOL_SCALE = 1e-8
FP_TOL = 1e-8
MAX_OUTER = 100
MAX_SWEEPS = 10_000
SIGMA_FLOOR_SCALE = 1e-12


def kkt_tolerance(lam: float) -> float:
    """Certification tolerance for a Lasso solve at penalty ``lam``."""
    return KKT_TOL_SCALE * (1.0 + lam)


class GramProblem:
    """One column regression problem expressed through a Gram matrix.

    Parameters
    ----------
    gram : (p, p) array
        Symmetric nonnegative-definite data matrix.
    target : int
        Index j of the response column (0-based). ``gram[j, j]`` must be
        positive, otherwise the problem is rejected.

    Predictor k is penalized with weight ``sqrt(gram[k, k])``; columns with
    zero variance are frozen at coefficient zero.
    """

    def __init__(self, gram, target: int):
        gram = as_sym_matrix(gram)
        p = gram.shape[0]
        target = int(target)
        if not 0 <= target < p:
            raise IndexError(f"target {target} out of range for p={p}")
        if gram[target, target] <= 0.0:
            raise DegenerateInput(
                f"target column {target} has nonpositive diagonal "
                f"{gram[target, target]!r}"
            )
        self.gram = gram
        self.target = target
        self.dim = p
        diag = np.diag(gram).copy()
        diag[diag < 0.0] = 0.0
        self.weights = np.sqrt(diag)
        self._diag = diag
        # coordinates that actually move: not the target, not zero-variance
        self.free = [k for k in range(p) if k != target and diag[k] > 0.0]

    def null_coefficients(self) -> np.ndarray:
        """The zero solution: -e_j."""
        b = np.zeros(self.dim)
        b[self.target] = -1.0
        return b

    def penalty(self, b: np.ndarray) -> float:
        """Weighted l1 penalty over the predictor coordinates."""
        pen = 0.0
        w = self.weights
        for k in self.free:
            pen += w[k] * abs(b[k])
        return pen

    def joint_objective(self, b: np.ndarray, sigma: float, lambda0: float) -> float:
        """b'Gb/(2 sigma) + sigma/2 + lambda0 * weighted-l1(b)."""
        quad = float(b @ (self.gram @ b))
        return quad / (2.0 * sigma) + sigma / 2.0 + lambda0 * self.penalty(b)


@dataclass(frozen=True)
class LassoSolution:
    """Certified Lasso solution at a fixed penalty."""

    coefficients: np.ndarray
    lam: float
    kkt_residual: float
    iterations: int


@dataclass(frozen=True)
class ScaledFit:
    """Joint coefficient / noise-level fit for one target column."""

    beta: np.ndarray
    sigma_hat: float
    lambda_final: float
    outer_iterations: int
    converged: bool
    kkt_residual: float
    degenerate: bool = False
    lambda_path: tuple = ()
    objective_path: tuple = ()


@dataclass(frozen=True)
class RegressionFit:
    """Scaled-Lasso regression fit with both coefficient scales.

    ``beta`` lives on the raw predictor scale, ``alpha`` on the normalized
    scale (``alpha[k] = sqrt(mean x_k^2) * beta[k]``).
    """

    beta: np.ndarray
    alpha: np.ndarray
    sigma_hat: float
    lambda_final: float
    outer_iterations: int
    converged: bool
    kkt_residual: float
    degenerate: bool = False
    zero_columns: tuple = ()


def _kkt_residual_from_gradient(
    problem: GramProblem, b, g, lam: float, subset=None
) -> float:
    """Max violation of the stationarity conditions, given g = gram @ b."""
    w = problem.weights
    res = 0.0
    for k in problem.free if subset is None else subset:
        gk = g[k] / w[k]
        bk = b[k]
        if bk > 0.0:
            r = abs(gk + lam)
        elif bk < 0.0:
            r = abs(gk - lam)
        else:
            r = abs(gk) - lam
            if r < 0.0:
                r = 0.0
        if r > res:
            res = r
    return float(res)


def kkt_residual(problem: GramProblem, b, lam: float) -> float:
    """Stationarity violation of coefficients ``b`` at penalty ``lam``.

    Zero iff ``b`` is exactly a Lasso solution for the problem at ``lam``.
    """
    b = np.asarray(b, dtype=np.float64)
    g = problem.gram @ b
    return _kkt_residual_from_gradient(problem, b, g, lam)


def _sweep(gram, diag, w, b, g, lam, order) -> float:
    """One pass of cyclic coordinate minimization over ``order``.

    ``b`` and ``g = gram @ b`` are updated in place. Returns the largest
    absolute coefficient change of the pass.
    """
    max_delta = 0.0
    for k in order:
        dk = diag[k]
        bk = b[k]
        z = dk * bk - g[k]
        t = lam * w[k]
        if z > t:
            nb = (z - t) / dk
        elif z < -t:
            nb = (z + t) / dk
        else:
            nb = 0.0
        delta = nb - bk
        if delta != 0.0:
            g += delta * gram[k]
            b[k] = nb
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


def _cd_solve(problem: GramProblem, lam: float, b, max_sweeps: int):
    """Coordinate descent to KKT certification; returns (b, g, res, sweeps).

    Strategy: one full pass, then cycles of active-set passes followed by a
    full verification pass, until the exactly recomputed gradient certifies
    stationarity. Raises ``NonConvergence`` (with the last iterate attached)
    if the sweep cap is hit first.
    """
    gram = problem.gram
    diag = problem._diag
    w = problem.weights
    order = problem.free
    tol = kkt_tolerance(lam)
    g = gram @ b
    sweeps = 0
    while True:
        _sweep(gram, diag, w, b, g, lam, order)
        sweeps += 1
        # polish the current active set before paying for full passes
        while sweeps < max_sweeps:
            active = [k for k in order if b[k] != 0.0]
            if not active:
                break
            _sweep(gram, diag, w, b, g, lam, active)
            sweeps += 1
            if _kkt_residual_from_gradient(problem, b, g, lam, active) <= 0.5 * tol:
                break
        g = gram @ b
        res = _kkt_residual_from_gradient(problem, b, g, lam)
        if res <= tol:
            return b, g, res, sweeps
        if sweeps >= max_sweeps:
            raise NonConvergence(
                f"coordinate descent hit the {max_sweeps}-sweep cap "
                f"(kkt residual {res:.3e} > {tol:.3e})",
                partial=LassoSolution(
                    coefficients=b, lam=lam, kkt_residual=res, iterations=sweeps
                ),
            )


def lasso_at_lambda(
    problem: GramProblem,
    lam: float,
    warm: LassoSolution | None = None,
    max_sweeps: int = MAX_SWEEPS,
) -> LassoSolution:
    """Solve the covariance-form Lasso at a fixed penalty level.

    Minimizes ``b'Gb/2 + lam * sum_k w_k |b_k|`` subject to ``b[j] = -1``
    by cyclic coordinate descent with an active-set strategy, and certifies
    the result against the stationarity conditions before returning.

    Parameters
    ----------
    problem : GramProblem
    lam : float
        Positive penalty level.
    warm : LassoSolution, optional
        Starting point (its coefficients are copied).

    Raises
    ------
    NonConvergence
        If the sweep cap is hit; the exception carries the last iterate.
    """
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    b = problem.null_coefficients()
    if warm is not None:
        src = np.asarray(warm.coefficients, dtype=np.float64)
        if src.shape != (problem.dim,):
            raise ValueError("warm start has wrong dimension")
        for k in problem.free:
            b[k] = src[k]
    b, _, res, sweeps = _cd_solve(problem, lam, b, max_sweeps)
    return LassoSolution(coefficients=b, lam=lam, kkt_residual=res, iterations=sweeps)


def scaled_lasso_column(
    problem: GramProblem,
    lambda0: float,
    warm_start: bool = True,
    max_outer: int = MAX_OUTER,
    max_sweeps: int = MAX_SWEEPS,
    fp_tol: float = FP_TOL,
) -> ScaledFit:
    """Jointly fit coefficients and noise level for the target column.

    Alternates, from the null solution, the three updates

        sigma^2 <- b' G b,   lambda <- sigma * lambda0,   b <- b(lambda)

    until the penalty is a relative fixed point (``fp_tol``) or the outer
    cap is reached. Convergence failures and degenerate (collapsed noise)
    columns are reported through flags, never by discarding the iterate.
    """
    if not lambda0 > 0.0:
        raise ValueError(f"lambda0 must be positive, got {lambda0!r}")
    gram = problem.gram
    j = problem.target
    sigma_floor = SIGMA_FLOOR_SCALE * math.sqrt(gram[j, j])
    b = problem.null_coefficients()
    sigma = math.sqrt(gram[j, j])
    lam = sigma * lambda0
    lambda_path = [lam]
    objective_path = []
    converged = False
    degenerate = False
    inner_failed = False
    outer = 0
    while outer < max_outer:
        outer += 1
        start = b if warm_start else problem.null_coefficients()
        try:
            b, _, _, _ = _cd_solve(problem, lam, start, max_sweeps)
        except NonConvergence as fail:
            b = fail.partial.coefficients
            inner_failed = True
        sigma = math.sqrt(max(float(b @ (gram @ b)), 0.0))
        objective_path.append(sigma + lambda0 * problem.penalty(b))
        if sigma <= sigma_floor:
            sigma = sigma_floor
            degenerate = True
            break
        lam_new = sigma * lambda0
        if inner_failed:
            break
        if abs(lam_new - lam) <= fp_tol * lam:
            lam = lam_new
            converged = True
            break
        lam = lam_new
        lambda_path.append(lam)
    lam = sigma * lambda0
    return ScaledFit(
        beta=b,
        sigma_hat=sigma,
        lambda_final=lam,
        outer_iterations=outer,
        converged=converged,
        kkt_residual=kkt_residual(problem, b, lam),
        degenerate=degenerate,
        lambda_path=tuple(lambda_path),
        objective_path=tuple(objective_path),
    )


def scaled_lasso_regression(y, x, lambda0: float) -> RegressionFit:
    """Scaled-Lasso linear regression of ``y`` on the columns of ``x``.

    Forms the Gram matrix of the augmented matrix [x, y]/sqrt(n) and runs
    the column solver with the response as target, so the fit minimizes

        ||y - x b||^2 / (2 n sigma) + sigma / 2 + lambda0 * ||D^(1/2) b||_1

    with D the diagonal of x'x/n. Identically zero predictor columns are
    frozen at coefficient zero and reported in ``zero_columns``.
    """
    x = as_matrix(x)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise ValueError(f"y must be a vector, got shape {y.shape}")
    if not np.isfinite(y).all():
        raise ValueError("y contains NaN or infinite entries")
    n, q = x.shape
    if y.shape[0] != n:
        raise ValueError(f"row mismatch: y has {y.shape[0]} rows, x has {n}")
    if n < 2:
        raise ValueError("need at least two observations")
    aug = np.column_stack([x, y])
    gram = mirror_upper(aug.T @ aug / n)
    zero_columns = tuple(k for k in range(q) if gram[k, k] == 0.0)
    if gram[q, q] <= 0.0:
        # zero response: the exact minimizer is the null fit
        return RegressionFit(
            beta=np.zeros(q),
            alpha=np.zeros(q),
            sigma_hat=0.0,
            lambda_final=0.0,
            outer_iterations=0,
            converged=True,
            kkt_residual=0.0,
            degenerate=True,
            zero_columns=zero_columns,
        )
    problem = GramProblem(gram, target=q)
    fit = scaled_lasso_column(problem, lambda0)
    beta = fit.beta[:q].copy()
    alpha = problem.weights[:q] * beta
    return RegressionFit(
        beta=beta,
        alpha=alpha,
        sigma_hat=fit.sigma_hat,
        lambda_final=fit.lambda_final,
        outer_iterations=fit.outer_iterations,
        converged=fit.converged,
        kkt_residual=fit.kkt_residual,
        degenerate=fit.degenerate,
        zero_columns=zero_columns,
    )


def default_lambda0(
    p: int,
    n: int,
    mode: str = "simulation",
    a_const: float | None = None,
    eps: float | None = None,
) -> float:
    """Reference penalty levels.

    ``simulation`` gives sqrt(log(p)/n); ``theory`` gives
    ``a_const * sqrt(2 log(p^2/eps) / n)`` and requires ``a_const > 1`` and
    ``0 < eps < 1``. Natural logarithms throughout.
    """
    p, n = int(p), int(n)
    if p < 2:
        raise ValueError(f"p must be at least 2, got {p}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if mode == "simulation":
        return math.sqrt(math.log(p) / n)
    if mode == "theory":
        if a_const is None or not a_const > 1.0:
            raise ValueError("theory mode requires a_const > 1")
        if eps is None or not 0.0 < eps < 1.0:
            raise ValueError("theory mode requires 0 < eps < 1")
        return a_const * math.sqrt(2.0 * math.log(p * p / eps) / n)
    raise ValueError(f"unknown lambda0 mode {mode!r}")
