"""Linear programming: ``max c.x`` s.t. ``A_ub x <= b_ub``, ``A_eq x == b_eq``, boxes.

The default backend is HiGHS through :func:`scipy.optimize.linprog`; a dense
two-phase tableau simplex with Bland's rule is kept for small problems and
for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog


@dataclass
class LinearProgram:
    c: np.ndarray
    a_ub: object = None
    b_ub: np.ndarray | None = None
    a_eq: object = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    maximize: bool = True

    @property
    def n(self) -> int:
        return len(self.c)

    def bounds(self):
        lo = np.full(self.n, 0.0) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.n, np.inf) if self.upper is None else np.asarray(self.upper, float)
        return lo, hi


class LPResult(NamedTuple):
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float
    x: np.ndarray | None


def _rows(a, n):
    if a is None:
        return sp.csr_matrix((0, n))
    return sp.csr_matrix(a) if not sp.issparse(a) else a.tocsr()


def solve_lp(lp: LinearProgram, method: str = "highs") -> LPResult:
    n = lp.n
    a_ub, a_eq = _rows(lp.a_ub, n), _rows(lp.a_eq, n)
    if n == 0:
        # only constant rows remain
        ok = np.all(np.asarray(lp.b_ub if a_ub.shape[0] else [], float) >= -1e-9) and \
            np.all(np.abs(np.asarray(lp.b_eq if a_eq.shape[0] else [], float)) <= 1e-9)
        return LPResult("optimal", 0.0, np.zeros(0)) if ok else LPResult("infeasible", np.nan, None)
    if method == "simplex":
        return _solve_simplex(lp)
    lo, hi = lp.bounds()
    sign = -1.0 if lp.maximize else 1.0
    res = linprog(
        sign * np.asarray(lp.c, float),
        A_ub=a_ub if a_ub.shape[0] else None,
        b_ub=lp.b_ub if a_ub.shape[0] else None,
        A_eq=a_eq if a_eq.shape[0] else None,
        b_eq=lp.b_eq if a_eq.shape[0] else None,
        bounds=np.column_stack([np.where(np.isfinite(lo), lo, -np.inf),
                                np.where(np.isfinite(hi), hi, np.inf)]),
        method="highs",
    )
    if res.status == 0:
        return LPResult("optimal", sign * res.fun, res.x)
    if res.status == 2:
        return LPResult("infeasible", np.nan, None)
    if res.status == 3:
        return LPResult("unbounded", np.inf if lp.maximize else -np.inf, None)
    raise RuntimeError(f"LP solver failed: {res.message}")


def _solve_simplex(lp: LinearProgram, tol: float = 1e-9) -> LPResult:
    """Two-phase tableau simplex, Bland's anti-cycling rule."""
    n = lp.n
    lo, hi = lp.bounds()
    a_ub = _rows(lp.a_ub, n).toarray()
    a_eq = _rows(lp.a_eq, n).toarray()
    b_ub = np.zeros(0) if lp.b_ub is None else np.asarray(lp.b_ub, float)
    b_eq = np.zeros(0) if lp.b_eq is None else np.asarray(lp.b_eq, float)
    c = np.asarray(lp.c, float) * (1.0 if lp.maximize else -1.0)

    # x = lo + x+ (finite lower) or x = x+ - x- (free); finite uppers become rows.
    cols, shift = [], np.zeros(n)
    for j in range(n):
        if np.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append((j, 1.0))
        else:
            cols += [(j, 1.0), (j, -1.0)]
    m_cols = len(cols)
    T = np.zeros((n, m_cols))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    rows_a, rows_b = [], []
    for r in range(a_ub.shape[0]):
        rows_a.append(a_ub[r] @ T), rows_b.append(b_ub[r] - a_ub[r] @ shift)
    for j in range(n):
        if np.isfinite(hi[j]):
            rows_a.append(T[j]), rows_b.append(hi[j] - shift[j])
    n_ub = len(rows_a)
    for r in range(a_eq.shape[0]):
        rows_a.append(a_eq[r] @ T), rows_b.append(b_eq[r] - a_eq[r] @ shift)
    A = np.array(rows_a).reshape(-1, m_cols)
    b = np.array(rows_b, float)
    m = len(b)
    # standard form with slacks on the <= rows
    S = np.zeros((m, n_ub))
    S[:n_ub, :n_ub] = np.eye(n_ub)
    A = np.hstack([A, S])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    total = A.shape[1]
    # phase one: artificial variable per row
    tab = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(total, total + m))
    obj1 = np.zeros(total + m)
    obj1[total:] = -1.0

    def run(tab, basis, obj, allowed):
        while True:
            cb = obj[basis]
            reduced = obj - cb @ tab[:, :-1]
            enter = next((j for j in range(len(obj)) if allowed[j] and reduced[j] > tol), None)
            if enter is None:
                return "optimal"
            col = tab[:, enter]
            pos = col > tol
            if not pos.any():
                return "unbounded"
            ratios = np.full(len(col), np.inf)
            ratios[pos] = tab[pos, -1] / col[pos]
            best = ratios.min()
            cands = [i for i in range(len(col)) if pos[i] and ratios[i] <= best + tol]
            leave = min(cands, key=lambda i: basis[i])
            tab[leave] /= tab[leave, enter]
            for i in range(len(tab)):
                if i != leave and tab[i, enter] != 0:
                    tab[i] -= tab[i, enter] * tab[leave]
            basis[leave] = enter

    allowed = np.ones(total + m, bool)
    run(tab, basis, obj1, allowed)
    if obj1[basis] @ tab[:, -1] < -1e-7:
        return LPResult("infeasible", np.nan, None)
    # drive remaining artificials out of the basis
    for i, bv in enumerate(basis):
        if bv >= total:
            nz = [j for j in range(total) if abs(tab[i, j]) > tol]
            if nz:
                j = nz[0]
                tab[i] /= tab[i, j]
                for r in range(m):
                    if r != i and tab[r, j] != 0:
                        tab[r] -= tab[r, j] * tab[i]
                basis[i] = j
    allowed[total:] = False
    obj2 = np.zeros(total + m)
    obj2[:m_cols] = c @ T
    status = run(tab, basis, obj2, allowed)
    if status == "unbounded":
        return LPResult("unbounded", np.inf if lp.maximize else -np.inf, None)
    z = np.zeros(total + m)
    z[basis] = tab[:, -1]
    x = shift + T @ z[:m_cols]
    val = float(np.asarray(lp.c, float) @ x)
    return LPResult("optimal", val, x)
