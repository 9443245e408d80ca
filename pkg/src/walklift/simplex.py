"""Dense two-phase simplex solver with Bland's rule.

Solves   minimize c @ x   subject to   A_ub x <= b_ub,  A_eq x == b_eq,
x >= 0. Deterministic smallest-index pivoting guarantees termination on
the small dense problems this package produces; speed is a non-goal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9


class SimplexError(RuntimeError):
    pass


class InfeasibleError(SimplexError):
    pass


class UnboundedError(SimplexError):
    pass


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _iterate(tableau: np.ndarray, basis: np.ndarray, n_cols: int, budget: int) -> int:
    """Run Bland-rule pivots on the canonical tableau until optimal."""
    m = tableau.shape[0] - 1
    used = 0
    while True:
        reduced = tableau[-1, :n_cols]
        candidates = np.nonzero(reduced < -PIVOT_TOL)[0]
        if candidates.size == 0:
            return used
        col = int(candidates[0])  # Bland: smallest eligible index
        column = tableau[:m, col]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if rows.size == 0:
            raise UnboundedError(f"column {col} unbounded")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[np.nonzero(ratios <= best + PIVOT_TOL)[0]]
        row = int(tied[np.argmin(basis[tied])])  # Bland: smallest basis index
        _pivot(tableau, basis, row, col)
        used += 1
        if used > budget:
            raise SimplexError("pivot budget exhausted")


def solve_lp(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    max_pivots: int | None = None,
) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    slack_rows = []
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=float))
        for i in range(A_ub.shape[0]):
            rows.append(A_ub[i])
            rhs.append(b_ub[i])
            slack_rows.append(len(rows) - 1)
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        b_eq = np.atleast_1d(np.asarray(b_eq, dtype=float))
        for i in range(A_eq.shape[0]):
            rows.append(A_eq[i])
            rhs.append(b_eq[i])
    if not rows:
        raise ValueError("no constraints given")
    A = np.vstack(rows)
    b = np.asarray(rhs, dtype=float)
    m = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"constraint width {A.shape[1]} does not match len(c)={n}")

    n_slack = len(slack_rows)
    full = np.zeros((m, n + n_slack + m))
    full[:, :n] = A
    for k, i in enumerate(slack_rows):
        full[i, n + k] = 1.0
    # normalize signs, then give every row an artificial basis variable
    neg = b < 0
    full[neg] *= -1.0
    b = np.abs(b)
    art0 = n + n_slack
    for i in range(m):
        full[i, art0 + i] = 1.0

    tableau = np.zeros((m + 1, n + n_slack + m + 1))
    tableau[:m, :-1] = full
    tableau[:m, -1] = b
    basis = np.array([art0 + i for i in range(m)], dtype=int)
    # phase-1 objective: sum of artificials, canonicalized
    tableau[-1, :] = -tableau[:m, :].sum(axis=0)
    tableau[-1, art0 : art0 + m] = 0.0

    budget = max_pivots if max_pivots is not None else 50 * (m + n + n_slack) + 1000
    iters = _iterate(tableau, basis, art0, budget)

    if tableau[-1, -1] < -PIVOT_TOL:  # phase-1 optimum is -(sum artificials)
        raise InfeasibleError(f"phase-1 residual {-tableau[-1, -1]:.3e}")

    # drive remaining artificial variables out of the basis
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= art0:
            pivot_cols = np.nonzero(np.abs(tableau[i, :art0]) > PIVOT_TOL)[0]
            if pivot_cols.size:
                _pivot(tableau, basis, i, int(pivot_cols[0]))
            else:
                keep[i] = False  # redundant constraint row

    rows_keep = np.concatenate([np.nonzero(keep)[0], [m]])
    tableau = tableau[rows_keep]
    basis = basis[keep]
    m2 = basis.size

    # phase-2 objective
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for i in range(m2):
        if tableau[-1, basis[i]] != 0.0:
            tableau[-1, :] -= tableau[-1, basis[i]] * tableau[i, :]
    tableau[:, art0 : art0 + m] = 0.0  # forbid artificials from re-entering

    iters += _iterate(tableau, basis, art0, budget)

    x = np.zeros(n + n_slack)
    for i in range(m2):
        if basis[i] < n + n_slack:
            x[basis[i]] = tableau[i, -1]
    return SimplexResult(x=x[:n], objective=float(c @ x[:n]), iterations=iters)
