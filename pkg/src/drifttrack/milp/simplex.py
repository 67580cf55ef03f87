"""Dense two-phase tableau simplex for small linear programs.

Solves  min c.x  subject to  A x <= b  and per-variable bounds lo <= x <= hi
(hi may be infinite).  Lower bounds are shifted to zero, finite upper bounds
become extra rows, and rows with negative right-hand sides get artificial
variables in phase one.  Pivoting is most-negative reduced cost until a run
of degenerate steps, after which Bland's rule takes over so termination is
guaranteed.  Numerical trouble raises; it is never swallowed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class SimplexNumericalError(RuntimeError):
    """The tableau degraded beyond the configured tolerances."""


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: np.ndarray | None
    value: float | None


@dataclass(eq=False)
class LpTableau:
    """Standard-form tableau state: matrix rows, objective row, and basis."""

    table: np.ndarray  # (m + 1, n + 1); last row objective, last column rhs
    basis: np.ndarray  # basic variable index per row

    @property
    def n_rows(self) -> int:
        return self.table.shape[0] - 1

    @property
    def n_cols(self) -> int:
        return self.table.shape[1] - 1


_DEGENERACY_THRESHOLD = 40


def _pivot(t: LpTableau, row: int, col: int) -> None:
    tab = t.table
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    tab[:, col] = 0.0
    tab[row, col] = 1.0
    t.basis[row] = col


def _choose_entering(t: LpTableau, allowed: np.ndarray, bland: bool, tol: float) -> int | None:
    costs = t.table[-1, :-1]
    candidates = np.where(allowed & (costs < -tol))[0]
    if candidates.size == 0:
        return None
    if bland:
        return int(candidates[0])
    return int(candidates[np.argmin(costs[candidates])])


def _choose_leaving(t: LpTableau, col: int, tol: float) -> int | None:
    column = t.table[:-1, col]
    rhs = t.table[:-1, -1]
    rows = np.where(column > tol)[0]
    if rows.size == 0:
        return None
    ratios = rhs[rows] / column[rows]
    best = ratios.min()
    ties = rows[ratios <= best + tol]
    # lowest basic-variable index on ties: deterministic and anti-cycling
    return int(ties[np.argmin(t.basis[ties])])


def _run_simplex(t: LpTableau, allowed: np.ndarray, tol: float, max_iter: int) -> LpStatus:
    bland = False
    stall = 0
    for _ in range(max_iter):
        col = _choose_entering(t, allowed, bland, tol)
        if col is None:
            return LpStatus.OPTIMAL
        row = _choose_leaving(t, col, tol)
        if row is None:
            return LpStatus.UNBOUNDED
        before = t.table[-1, -1]
        _pivot(t, row, col)
        if abs(t.table[-1, -1] - before) <= tol:
            stall += 1
            if stall >= _DEGENERACY_THRESHOLD:
                bland = True
        else:
            stall = 0
            bland = False
    raise SimplexNumericalError(
        f"simplex exceeded {max_iter} pivots; tableau likely ill-conditioned"
    )


def solve_lp(
    c: np.ndarray,
    A_ub: np.ndarray,
    b_ub: np.ndarray,
    bounds: list[tuple[float, float | None]],
    tol: float = 1e-9,
    max_iter: int | None = None,
) -> LpResult:
    """Optimal basic solution of min c.x s.t. A_ub x <= b_ub, lo <= x <= hi.

    Every lower bound must be finite.  Returns OPTIMAL with the solution and
    value, or INFEASIBLE / UNBOUNDED.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.shape[0]
    A_ub = np.asarray(A_ub, dtype=float).reshape(-1, n) if np.size(A_ub) else np.empty((0, n))
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    if A_ub.shape[0] != b_ub.shape[0]:
        raise ValueError("A_ub and b_ub row counts differ")
    if len(bounds) != n:
        raise ValueError("one (lower, upper) pair per variable is required")

    lo = np.empty(n)
    hi = np.empty(n)
    for k, (l, h) in enumerate(bounds):
        if l is None or not math.isfinite(l):
            raise ValueError(f"variable {k}: lower bound must be finite")
        lo[k] = l
        hi[k] = math.inf if h is None else h
        if hi[k] < lo[k]:
            return LpResult(LpStatus.INFEASIBLE, None, None)

    # Shift to y = x - lo >= 0 and fold finite upper bounds in as rows.
    rhs = b_ub - A_ub @ lo
    rows = [A_ub]
    extra_rhs = [rhs]
    ub_idx = np.where(np.isfinite(hi))[0]
    if ub_idx.size:
        E = np.zeros((ub_idx.size, n))
        E[np.arange(ub_idx.size), ub_idx] = 1.0
        rows.append(E)
        extra_rhs.append(hi[ub_idx] - lo[ub_idx])
    A = np.vstack(rows)
    b = np.concatenate(extra_rhs)
    m = A.shape[0]
    if max_iter is None:
        max_iter = 200 + 50 * (m + n)

    # Orient rows so rhs >= 0; negated rows get surplus -1 and an artificial.
    neg = b < 0
    A = A.copy()
    A[neg] *= -1.0
    b = b.copy()
    b[neg] *= -1.0
    n_art = int(neg.sum())

    n_total = n + m + n_art
    table = np.zeros((m + 1, n_total + 1))
    table[:m, :n] = A
    table[:m, -1] = b
    basis = np.empty(m, dtype=int)
    slack_sign = np.where(neg, -1.0, 1.0)
    art_col = n + m
    for i in range(m):
        table[i, n + i] = slack_sign[i]
        if neg[i]:
            table[i, art_col] = 1.0
            basis[i] = art_col
            art_col += 1
        else:
            basis[i] = n + i
    t = LpTableau(table=table, basis=basis)

    structural = np.zeros(n_total, dtype=bool)
    structural[: n + m] = True

    if n_art:
        # Phase one: minimize the artificial sum.
        t.table[-1, n + m :-1] = 1.0
        for i in range(m):
            if t.basis[i] >= n + m:
                t.table[-1] -= t.table[i]
        status = _run_simplex(t, structural, tol, max_iter)
        if status is LpStatus.UNBOUNDED:
            raise SimplexNumericalError("phase one reported unbounded; invalid tableau")
        if t.table[-1, -1] < -1e-7:
            return LpResult(LpStatus.INFEASIBLE, None, None)
        # Remove residual artificials from the basis.
        for i in range(m):
            if t.basis[i] >= n + m:
                row = t.table[i, : n + m]
                nz = np.where(np.abs(row) > tol)[0]
                if nz.size:
                    _pivot(t, i, int(nz[0]))
        keep_rows = [i for i in range(m) if t.basis[i] < n + m]
        if len(keep_rows) < m:
            t.table = np.vstack([t.table[keep_rows], t.table[-1:]])
            t.basis = t.basis[keep_rows]
            m = len(keep_rows)
        t.table = np.hstack([t.table[:, : n + m], t.table[:, -1:]])
        structural = structural[: n + m]

    # Phase two objective (shifted variables).
    t.table[-1, :] = 0.0
    t.table[-1, :n] = c
    for i in range(t.basis.shape[0]):
        coef = t.table[-1, t.basis[i]]
        if abs(coef) > 0.0:
            t.table[-1] -= coef * t.table[i]
    status = _run_simplex(t, structural, tol, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED, None, None)

    y = np.zeros(n + t.basis.shape[0])
    for i, var in enumerate(t.basis):
        y[var] = t.table[i, -1]
    x = lo + y[:n]
    residual = A_ub @ x - b_ub if A_ub.shape[0] else np.zeros(0)
    scale = max(1.0, float(np.abs(b_ub).max()) if b_ub.size else 1.0)
    if residual.size and residual.max() > 1e-6 * scale:
        raise SimplexNumericalError(
            f"solution violates a constraint by {residual.max():.3e}; tableau degraded"
        )
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x))
