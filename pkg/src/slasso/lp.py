"""Dense two-phase primal simplex for desk-scale linear programs.

Bland's rule is always on, so pivot selection is deterministic and cycling
is impossible; identical inputs give bitwise-identical solutions. Variable
bounds are handled implicitly (bound flips), keeping the tableau at one row
per constraint. Feasibility and the objective are re-checked against the
original problem data before an optimal solution is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalBreakdown

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_INF = math.inf
_REDUCED_COST_TOL = 1e-9
_PIVOT_TOL = 1e-11
_FEAS_TOL = 1e-9

_AT_LOWER, _AT_UPPER, _BASIC = 0, 1, 2


class LpProblem:
    """minimize c'x subject to row constraints and box bounds.

    Parameters
    ----------
    objective : sequence of float
        Cost vector c.
    constraints : sequence of (row, sense, rhs)
        ``sense`` is one of "<=", ">=", "="; ">=" rows are stored negated.
    bounds : sequence of (lower, upper), optional
        Per-variable bounds; -inf / +inf allowed. Default (0, +inf).
    """

    def __init__(self, objective, constraints, bounds=None):
        c = np.asarray(objective, dtype=np.float64)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("objective must be a nonempty vector")
        if not np.isfinite(c).all():
            raise ValueError("objective has non-finite coefficients")
        m = c.size
        rows, senses, rhs = [], [], []
        for row, sense, b in constraints:
            a = np.asarray(row, dtype=np.float64)
            if a.shape != (m,):
                raise ValueError(f"constraint row has shape {a.shape}, expected ({m},)")
            if not (np.isfinite(a).all() and math.isfinite(b)):
                raise ValueError("constraint has non-finite coefficients")
            if sense == ">=":
                a, b, sense = -a, -b, "<="
            if sense not in ("<=", "="):
                raise ValueError(f"unknown constraint sense {sense!r}")
            rows.append(a)
            senses.append(sense)
            rhs.append(float(b))
        self.objective = c
        self.rows = np.array(rows, dtype=np.float64).reshape(len(rows), m)
        self.senses = tuple(senses)
        self.rhs = np.asarray(rhs, dtype=np.float64)
        if bounds is None:
            bounds = [(0.0, _INF)] * m
        if len(bounds) != m:
            raise ValueError("one (lower, upper) pair per variable required")
        lower, upper = [], []
        for lo, hi in bounds:
            lo, hi = float(lo), float(hi)
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise ValueError(f"invalid bounds ({lo}, {hi})")
            lower.append(lo)
            upper.append(hi)
        self.lower = np.asarray(lower)
        self.upper = np.asarray(upper)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return len(self.senses)


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome; ``x`` and ``row_duals`` are valid iff optimal.

    ``row_duals`` follows the c_B B^-1 convention in input-row order: the
    multiplier vector mu = -row_duals is dual feasible (mu >= 0 on "<="
    rows) and its dual objective matches the primal objective.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    row_duals: np.ndarray | None = None


class _Tableau:
    """Computational-form state for the bounded-variable simplex."""

    def __init__(self, problem: LpProblem):
        n_orig = problem.n_vars
        # variable substitutions: original k -> (kind, comp index, offset)
        cols, upper, costs = [], [], []
        self.var_map = []
        for k in range(n_orig):
            lo, hi = problem.lower[k], problem.upper[k]
            if lo > -_INF:
                self.var_map.append(("shift", len(upper), lo))
                cols.append((k, 1.0))
                upper.append(hi - lo)
                costs.append(problem.objective[k])
            elif hi < _INF:
                self.var_map.append(("flip", len(upper), hi))
                cols.append((k, -1.0))
                upper.append(_INF)
                costs.append(-problem.objective[k])
            else:
                self.var_map.append(("split", len(upper), 0.0))
                cols.append((k, 1.0))
                upper.append(_INF)
                costs.append(problem.objective[k])
                cols.append((k, -1.0))
                upper.append(_INF)
                costs.append(-problem.objective[k])
        m = problem.n_constraints
        n_struct = len(upper)
        a = np.zeros((m, n_struct))
        for comp, (k, sign) in enumerate(cols):
            a[:, comp] = sign * problem.rows[:, k]
        rhs = problem.rhs.copy()
        for k in range(n_orig):
            kind, _, off = self.var_map[k]
            if kind in ("shift", "flip") and off != 0.0:
                rhs -= problem.rows[:, k] * off
        # slacks for inequality rows
        self.slack_of = [-1] * m
        for i, sense in enumerate(problem.senses):
            if sense == "<=":
                self.slack_of[i] = n_struct + sum(
                    1 for s in self.slack_of[:i] if s >= 0
                )
        n_slack = sum(1 for s in self.slack_of if s >= 0)
        # sign-normalize rhs, then add artificials where no +1 slack remains
        self.row_sign = np.ones(m)
        self.art_of = [-1] * m
        n_art = 0
        for i in range(m):
            if rhs[i] < 0.0:
                self.row_sign[i] = -1.0
            if self.slack_of[i] < 0 or self.row_sign[i] < 0.0:
                self.art_of[i] = n_struct + n_slack + n_art
                n_art += 1
        n_total = n_struct + n_slack + n_art
        t = np.zeros((m, n_total))
        t[:, :n_struct] = self.row_sign[:, None] * a
        for i in range(m):
            if self.slack_of[i] >= 0:
                t[i, self.slack_of[i]] = self.row_sign[i]
            if self.art_of[i] >= 0:
                t[i, self.art_of[i]] = 1.0
        self.t = t
        self.v = np.abs(rhs)
        self.upper = np.asarray(upper + [_INF] * (n_slack + n_art))
        self.costs = np.asarray(costs + [0.0] * (n_slack + n_art))
        self.basis = np.array(
            [self.art_of[i] if self.art_of[i] >= 0 else self.slack_of[i] for i in range(m)],
            dtype=np.int64,
        )
        self.n_struct = n_struct
        self.first_art = n_struct + n_slack
        self.n_total = n_total
        self.status = np.full(n_total, _AT_LOWER, dtype=np.int64)
        self.status[self.basis] = _BASIC
        # original-row index per tableau row (rows may be dropped later)
        self.orig_row = np.arange(m)

    def drop_rows(self, keep: np.ndarray) -> None:
        self.t = self.t[keep]
        self.v = self.v[keep]
        self.basis = self.basis[keep]
        self.orig_row = self.orig_row[keep]

    def values(self) -> np.ndarray:
        """Current values of all computational variables."""
        x = np.where(self.status == _AT_UPPER, self.upper, 0.0)
        x[self.basis] = self.v
        return x


def _run_simplex(tab: _Tableau, costs: np.ndarray, allow: np.ndarray, max_iter: int):
    """Bland-rule simplex to optimality; returns None, or UNBOUNDED."""
    t, v, upper, basis, status = tab.t, tab.v, tab.upper, tab.basis, tab.status
    m = t.shape[0]
    d = costs - t.T @ costs[basis]
    for _ in range(max_iter):
        at_lower = (status == _AT_LOWER) & allow & (d < -_REDUCED_COST_TOL) & (upper > 0.0)
        at_upper = (status == _AT_UPPER) & allow & (d > _REDUCED_COST_TOL)
        eligible = np.flatnonzero(at_lower | at_upper)
        if eligible.size == 0:
            return None
        enter = int(eligible[0])
        direction = 1.0 if status[enter] == _AT_LOWER else -1.0
        col = t[:, enter].copy()
        w = direction * col
        # ratio test: basic-variable limits plus the entering variable's span
        best_t = upper[enter]
        best_var = enter
        best_row = -1
        best_to_upper = False
        for i in range(m):
            wi = w[i]
            if wi > _PIVOT_TOL:
                ti = v[i] / wi
                to_upper = False
            elif wi < -_PIVOT_TOL and upper[basis[i]] < _INF:
                ti = (upper[basis[i]] - v[i]) / (-wi)
                to_upper = True
            else:
                continue
            if ti < best_t or (ti == best_t and basis[i] < best_var):
                best_t = ti
                best_var = int(basis[i])
                best_row = i
                best_to_upper = to_upper
        if not best_t < _INF:
            return UNBOUNDED
        step = max(float(best_t), 0.0)
        if best_row < 0:
            # bound flip: the entering variable crosses its own box
            v -= direction * step * col
            status[enter] = _AT_UPPER if direction > 0 else _AT_LOWER
            continue
        r = best_row
        leaving = int(basis[r])
        enter_value = step if direction > 0 else upper[enter] - step
        v -= direction * step * col
        t[r] = t[r] / t[r, enter]
        elim = t[:, enter].copy()
        elim[r] = 0.0
        t -= np.outer(elim, t[r])
        d = d - d[enter] * t[r]
        t[:, enter] = 0.0
        t[r, enter] = 1.0
        v[r] = enter_value
        basis[r] = enter
        status[enter] = _BASIC
        status[leaving] = _AT_UPPER if best_to_upper else _AT_LOWER
    raise NumericalBreakdown("simplex iteration cap exceeded")


def _evict_artificials(tab: _Tableau) -> None:
    """Pivot leftover artificials out of the basis; drop dependent rows."""
    m = tab.t.shape[0]
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if tab.basis[i] < tab.first_art:
            continue
        row = tab.t[i, : tab.first_art]
        candidates = np.flatnonzero(
            (np.abs(row) > _PIVOT_TOL) & (tab.status[: tab.first_art] != _BASIC)
        )
        if candidates.size == 0:
            tab.status[tab.basis[i]] = _AT_LOWER
            keep[i] = False
            continue
        enter = int(candidates[0])
        tab.t[i] = tab.t[i] / tab.t[i, enter]
        elim = tab.t[:, enter].copy()
        elim[i] = 0.0
        tab.t -= np.outer(elim, tab.t[i])
        tab.t[:, enter] = 0.0
        tab.t[i, enter] = 1.0
        tab.status[tab.basis[i]] = _AT_LOWER
        tab.basis[i] = enter
        tab.status[enter] = _BASIC
        tab.v[i] = 0.0
    if not keep.all():
        tab.drop_rows(keep)


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve an LpProblem by two-phase dense simplex with Bland's rule.

    Infeasible and unbounded outcomes are reported through the solution
    status, not exceptions; ``NumericalBreakdown`` is raised only when the
    solver loses numerical control (persistent tiny pivots, failed
    certification).
    """
    tab = _Tableau(problem)
    if max_iter is None:
        max_iter = 10_000 + 200 * (tab.t.shape[0] + tab.n_total)
    allow = np.ones(tab.n_total, dtype=bool)
    if tab.first_art < tab.n_total:
        phase1 = np.zeros(tab.n_total)
        phase1[tab.first_art :] = 1.0
        outcome = _run_simplex(tab, phase1, allow, max_iter)
        if outcome == UNBOUNDED:
            raise NumericalBreakdown("phase-1 objective reported unbounded")
        art_level = float(sum(tab.v[tab.basis >= tab.first_art], 0.0))
        if art_level > _FEAS_TOL * (1.0 + float(np.abs(problem.rhs).max(initial=0.0))):
            return LpSolution(status=INFEASIBLE, x=None, objective=None)
        _evict_artificials(tab)
    allow[tab.first_art :] = False
    outcome = _run_simplex(tab, tab.costs, allow, max_iter)
    if outcome == UNBOUNDED:
        return LpSolution(status=UNBOUNDED, x=None, objective=None)
    x = _original_solution(tab, problem)
    _certify(problem, x)
    duals = _row_duals(tab, problem.n_constraints)
    obj = float(problem.objective @ x)
    return LpSolution(status=OPTIMAL, x=x, objective=obj, row_duals=duals)


def _original_solution(tab: _Tableau, problem: LpProblem) -> np.ndarray:
    comp = tab.values()
    x = np.empty(problem.n_vars)
    for k, (kind, idx, off) in enumerate(tab.var_map):
        if kind == "shift":
            x[k] = off + comp[idx]
        elif kind == "flip":
            x[k] = off - comp[idx]
        else:
            x[k] = comp[idx] - comp[idx + 1]
    return x


def _certify(problem: LpProblem, x: np.ndarray) -> None:
    """Feasibility residual check against the original data."""
    if not np.isfinite(x).all():
        raise NumericalBreakdown("solution has non-finite entries")
    ax = problem.rows @ x
    for i, sense in enumerate(problem.senses):
        tol = _FEAS_TOL * (1.0 + abs(problem.rhs[i]))
        gap = float(ax[i] - problem.rhs[i])
        if sense == "<=" and gap > tol:
            raise NumericalBreakdown(f"constraint {i} violated by {gap:.3e}")
        if sense == "=" and abs(gap) > tol:
            raise NumericalBreakdown(f"constraint {i} violated by {abs(gap):.3e}")
    lo_gap = problem.lower - x
    hi_gap = x - problem.upper
    lo_gap[np.isinf(problem.lower)] = -_INF
    hi_gap[np.isinf(problem.upper)] = -_INF
    worst = max(float(lo_gap.max(initial=-_INF)), float(hi_gap.max(initial=-_INF)))
    if worst > _FEAS_TOL * (1.0 + float(np.abs(x).max())):
        raise NumericalBreakdown(f"variable bound violated by {worst:.3e}")


def _row_duals(tab: _Tableau, n_rows: int) -> np.ndarray:
    """Duals y = c_B B^-1 per input row (zero for dropped dependent rows)."""
    d = tab.costs - tab.t.T @ tab.costs[tab.basis]
    y = np.zeros(n_rows)
    for pos, orig in enumerate(tab.orig_row):
        art = tab.art_of[orig]
        if art >= 0:
            y[orig] = -d[art] * tab.row_sign[orig]
        else:
            # slack column carries the row sign, which cancels against it
            y[orig] = -d[tab.slack_of[orig]]
    return y
