"""Small dense two-phase simplex solver.

The facet-nonredundancy test reduces to linear programs with a handful of
free variables (a point on a bisector hyperplane plus one slack level) and
at most a few hundred inequality rows.  A self-contained tableau solver
keeps every pivot auditable and avoids an external LP dependency.

Free variables are split into positive/negative parts; equalities get
artificial variables and a phase-1 objective.  Dantzig pricing is used by
default with a switch to Bland's rule after a fixed number of iterations,
which guarantees termination on the degenerate, highly symmetric programs
produced by lattice configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_EPS = 1e-11
_COST_EPS = 1e-11


class SimplexError(RuntimeError):
    """The solver failed to converge (should not happen on sane input)."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float | None


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None) -> LPResult:
    """Maximize ``c @ x`` over free x subject to ``a_ub x <= b_ub`` and ``a_eq x = b_eq``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    n_ub = 0
    if a_ub is not None and len(a_ub):
        a_ub = np.asarray(a_ub, dtype=float).reshape(-1, n)
        b_ub = np.asarray(b_ub, dtype=float).ravel()
        rows.append(a_ub)
        rhs.append(b_ub)
        n_ub = a_ub.shape[0]
    if a_eq is not None and len(a_eq):
        a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
        b_eq = np.asarray(b_eq, dtype=float).ravel()
        rows.append(a_eq)
        rhs.append(b_eq)
    if not rows:
        raise ValueError("LP without constraints is unbounded by construction")
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    m = a.shape[0]

    # Row equilibration for conditioning; keeps the decision tolerances honest.
    row_scale = np.maximum(np.abs(a).max(axis=1), np.abs(b))
    row_scale[row_scale < 1e-30] = 1.0
    a = a / row_scale[:, None]
    b = b / row_scale

    # Split free variables, append slack columns for the <= rows.
    split = np.hstack([a, -a])
    n_split = 2 * n
    slack = np.zeros((m, n_ub))
    slack[:n_ub, :] = np.eye(n_ub)
    tableau_a = np.hstack([split, slack])

    # Normalize to b >= 0 (flips slack signs on flipped rows).
    flip = b < 0
    tableau_a[flip] *= -1.0
    b = np.where(flip, -b, b)

    # Rows whose slack column is unusable as a start basis get an artificial.
    needs_artificial = np.ones(m, dtype=bool)
    needs_artificial[:n_ub] = flip[:n_ub]
    art_idx = np.flatnonzero(needs_artificial)
    n_art = art_idx.size
    art = np.zeros((m, n_art))
    art[art_idx, np.arange(n_art)] = 1.0

    full = np.hstack([tableau_a, art, b[:, None]])
    n_cols = full.shape[1] - 1
    basis = np.empty(m, dtype=int)
    basis[~needs_artificial] = n_split + np.flatnonzero(~needs_artificial[:n_ub])
    basis[art_idx] = n_split + n_ub + np.arange(n_art)

    if n_art:
        cost = np.zeros(n_cols)
        cost[n_split + n_ub :] = -1.0  # phase 1: maximize -(sum of artificials)
        value = _run(full, basis, cost)
        if value is None:
            raise SimplexError("phase 1 unbounded")
        if value < -1e-8:
            return LPResult("infeasible", None, None)
        _expel_artificials(full, basis, n_split + n_ub)

    cost = np.zeros(n_cols)
    cost[:n] = c
    cost[n : 2 * n] = -c
    cost[n_split + n_ub :] = -np.inf  # artificials never re-enter
    value = _run(full, basis, cost)
    if value is None:
        return LPResult("unbounded", None, None)
    x_full = np.zeros(n_cols)
    x_full[basis] = full[:, -1]
    x = x_full[:n] - x_full[n : 2 * n]
    return LPResult("optimal", x, float(cost[:n_split] @ x_full[:n_split]))


def _run(full: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> float | None:
    """Primal simplex loop on the full tableau. Returns objective or None if unbounded."""
    m = basis.size
    n_cols = full.shape[1] - 1
    finite = np.isfinite(cost)
    max_iter = 200 * (m + n_cols)
    bland_after = 8 * (m + n_cols)
    for it in range(max_iter):
        cb = cost[basis]
        # reduced costs z_j = c_j - c_B B^-1 A_j, computed from the tableau rows
        reduced = np.where(finite, cost - cb @ full[:, :-1], -np.inf)
        reduced[basis] = -np.inf
        if it < bland_after:
            entering = int(np.argmax(reduced))
            if reduced[entering] <= _COST_EPS:
                break
        else:
            candidates = np.flatnonzero(reduced > _COST_EPS)
            if candidates.size == 0:
                break
            entering = int(candidates[0])
        col = full[:, entering]
        positive = col > _PIVOT_EPS
        if not positive.any():
            return None
        ratios = np.full(m, np.inf)
        ratios[positive] = full[positive, -1] / col[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _PIVOT_EPS)
        leaving = int(ties[np.argmin(basis[ties])])  # Bland-style tie break
        _pivot(full, basis, leaving, entering)
    else:
        raise SimplexError("simplex iteration limit exceeded")
    return float(cost[basis] @ full[:, -1])


def _pivot(full: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    full[row] /= full[row, col]
    factors = full[:, col].copy()
    factors[row] = 0.0
    full -= np.outer(factors, full[row])
    full[:, col] = 0.0
    full[row, col] = 1.0
    basis[row] = col


def _expel_artificials(full: np.ndarray, basis: np.ndarray, first_art: int) -> None:
    """Pivot zero-level artificials out of the basis where possible."""
    for row in np.flatnonzero(basis >= first_art):
        candidates = np.flatnonzero(np.abs(full[row, :first_art]) > 1e-9)
        if candidates.size:
            _pivot(full, basis, int(row), int(candidates[0]))
        # else: redundant row; harmless to leave the artificial at level 0
