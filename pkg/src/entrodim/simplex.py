"""A small dense simplex solver for the cover/packing LP pair.

The one problem solved here, in the maximization form

    max  sum_j y_j
    s.t. sum_{j in row_i} y_j <= b_i      (one row per ball)
         y >= 0                           (one variable per atom)

has the all-slack basis feasible from the start (b_i > 0), so no phase one
is needed.  Bland's rule keeps the pivoting deterministic and cycle free;
cover polytopes are heavily degenerate so this matters.  The optimal row
multipliers (negated reduced costs of the slack columns) solve the dual,
which is exactly the fractional cover problem.

Instances small enough get exact Fraction arithmetic so golden tests do not
depend on float pivot noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EntrodimError

EXACT_VAR_LIMIT = 64
EXACT_ROW_LIMIT = 128
_TOL = 1e-10
_MAX_PIVOTS = 20000


class SimplexError(EntrodimError):
    pass


@dataclass(frozen=True)
class LpSolution:
    value: float          # optimal sum of y
    y: tuple              # variable values (atom masses)
    duals: tuple          # row multipliers (fractional cover coefficients)
    exact: bool
    pivots: int


def solve_packing_lp(rows, bounds, n_vars, exact=None):
    """rows: list of index tuples (variables appearing in each <= constraint);
    bounds: per-row right-hand sides (positive); n_vars: variable count."""
    m = len(rows)
    if any(b <= 0 for b in bounds):
        raise SimplexError("all bounds must be positive")
    if exact is None:
        exact = n_vars <= EXACT_VAR_LIMIT and m <= EXACT_ROW_LIMIT
    if exact:
        return _solve_exact(rows, bounds, n_vars)
    return _solve_float(rows, bounds, n_vars)


def _solve_float(rows, bounds, n_vars):
    m = len(rows)
    width = n_vars + m + 1
    t = np.zeros((m + 1, width), dtype=float)
    for i, row in enumerate(rows):
        for j in row:
            t[i, j] = 1.0
        t[i, n_vars + i] = 1.0
        t[i, -1] = float(bounds[i])
    # objective row holds reduced costs; maximize sum(y)
    t[m, :n_vars] = 1.0
    basis = [n_vars + i for i in range(m)]

    pivots = 0
    while True:
        enter = -1
        for j in range(n_vars + m):
            if t[m, j] > _TOL:
                enter = j
                break
        if enter < 0:
            break
        ratio_best = None
        leave = -1
        for i in range(m):
            a = t[i, enter]
            if a > _TOL:
                r = t[i, -1] / a
                if (ratio_best is None or r < ratio_best - _TOL
                        or (abs(r - ratio_best) <= _TOL and basis[i] < basis[leave])):
                    ratio_best = r if ratio_best is None else min(r, ratio_best)
                    leave = i
        if leave < 0:
            raise SimplexError("unbounded LP (cannot happen for bounded packings)")
        _pivot_float(t, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise SimplexError("pivot limit exceeded")

    y = [0.0] * n_vars
    for i, var in enumerate(basis):
        if var < n_vars:
            y[var] = t[i, -1]
    duals = [max(0.0, -t[m, n_vars + i]) for i in range(m)]
    value = float(sum(y))
    return LpSolution(value, tuple(y), tuple(duals), False, pivots)


def _pivot_float(t, leave, enter):
    t[leave] /= t[leave, enter]
    col = t[:, enter].copy()
    col[leave] = 0.0
    t -= np.outer(col, t[leave])
    t[:, enter] = 0.0
    t[leave, enter] = 1.0


def _solve_exact(rows, bounds, n_vars):
    m = len(rows)
    zero = Fraction(0)
    one = Fraction(1)
    width = n_vars + m + 1
    t = [[zero] * width for _ in range(m + 1)]
    for i, row in enumerate(rows):
        for j in row:
            t[i][j] = one
        t[i][n_vars + i] = one
        t[i][-1] = Fraction(bounds[i])
    for j in range(n_vars):
        t[m][j] = one
    basis = [n_vars + i for i in range(m)]

    pivots = 0
    while True:
        enter = -1
        for j in range(n_vars + m):
            if t[m][j] > 0:
                enter = j
                break
        if enter < 0:
            break
        ratio_best = None
        leave = -1
        for i in range(m):
            a = t[i][enter]
            if a > 0:
                r = t[i][-1] / a
                if ratio_best is None or r < ratio_best or (
                        r == ratio_best and basis[i] < basis[leave]):
                    ratio_best = r
                    leave = i
        if leave < 0:
            raise SimplexError("unbounded LP (cannot happen for bounded packings)")
        piv = t[leave][enter]
        t[leave] = [v / piv for v in t[leave]]
        for i in range(m + 1):
            if i != leave and t[i][enter] != 0:
                f = t[i][enter]
                t[i] = [a - f * b for a, b in zip(t[i], t[leave])]
        basis[leave] = enter
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise SimplexError("pivot limit exceeded")

    y = [zero] * n_vars
    for i, var in enumerate(basis):
        if var < n_vars:
            y[var] = t[i][-1]
    duals = [-t[m][n_vars + i] for i in range(m)]
    duals = [d if d > 0 else zero for d in duals]
    value = float(sum(y))
    return LpSolution(value, tuple(float(v) for v in y),
                      tuple(float(d) for d in duals), True, pivots)
