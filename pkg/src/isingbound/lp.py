"""Linear programs: maximize c @ x subject to equality, inequality and bound constraints.

``method="simplex"`` is a dense two-phase revised simplex with Bland's rule;
``method="highs"`` hands the same problem to HiGHS through scipy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
STALLED = "stalled"


@dataclass
class LPResult:
    status: str
    x: Optional[np.ndarray]
    value: Optional[float]
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _dense(A, ncols):
    if A is None:
        return np.zeros((0, ncols))
    if sp.issparse(A):
        return A.toarray().astype(np.float64)
    return np.atleast_2d(np.asarray(A, dtype=np.float64)).reshape(-1, ncols)


def lp_solve(
    c,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    method: str = "simplex",
    tol: float = 1e-9,
    max_iters: int = 50_000,
) -> LPResult:
    """Maximize ``c @ x`` s.t. ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``lo <= x <= hi``.

    ``bounds`` defaults to ``x >= 0``; use ``-np.inf`` / ``np.inf`` for open sides.
    """
    c = np.asarray(c, dtype=np.float64)
    if not np.all(np.isfinite(c)):
        raise ValueError("objective coefficients must be finite")
    nvar = len(c)
    if bounds is None:
        bounds = [(0.0, np.inf)] * nvar
    bounds = [(-np.inf if lo is None else float(lo), np.inf if hi is None else float(hi)) for lo, hi in bounds]
    if len(bounds) != nvar:
        raise ValueError("need one (lo, hi) pair per variable")
    if method == "highs":
        return _solve_highs(c, A_eq, b_eq, A_ub, b_ub, bounds)
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    return _solve_simplex(c, _dense(A_eq, nvar), _vec(b_eq), _dense(A_ub, nvar), _vec(b_ub), bounds, tol, max_iters)


def _vec(b):
    return np.zeros(0) if b is None else np.asarray(b, dtype=np.float64).reshape(-1)


def _solve_highs(c, A_eq, b_eq, A_ub, b_ub, bounds) -> LPResult:
    from scipy.optimize import linprog

    res = linprog(-c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, STALLED)
    if status != OPTIMAL:
        return LPResult(status, None, None, int(getattr(res, "nit", 0)))
    return LPResult(status, res.x, float(c @ res.x), int(res.nit))


def _solve_simplex(c, A_eq, b_eq, A_ub, b_ub, bounds, tol, max_iters) -> LPResult:
    nvar = len(c)
    # Substitute x = offset + T @ z with z >= 0; finite upper bounds become rows.
    cols = []  # (original index, sign)
    offset = np.zeros(nvar)
    extra_rows = []
    for j, (lo, hi) in enumerate(bounds):
        if lo > hi:
            return LPResult(INFEASIBLE, None, None)
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    T = np.zeros((nvar, len(cols)))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    nz = len(cols)

    Aeq = A_eq @ T
    beq = b_eq - A_eq @ offset
    Aub = A_ub @ T
    bub = b_ub - A_ub @ offset
    for k, ub in extra_rows:
        row = np.zeros(nz)
        row[k] = 1.0
        Aub = np.vstack([Aub, row])
        bub = np.append(bub, ub)
    m_eq, m_ub = len(beq), len(bub)
    m = m_eq + m_ub
    # standard form [z, slacks]
    A = np.zeros((m, nz + m_ub))
    A[:m_eq, :nz] = Aeq
    A[m_eq:, :nz] = Aub
    A[m_eq:, nz:] = np.eye(m_ub)
    b = np.concatenate([beq, bub])
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    cz = np.concatenate([T.T @ c, np.zeros(m_ub)])
    const = float(c @ offset)
    nstd = A.shape[1]

    if m == 0:
        if np.any(cz > tol):
            return LPResult(UNBOUNDED, None, None)
        x = offset.copy()
        return LPResult(OPTIMAL, x, float(c @ x))

    sx = _Simplex(np.hstack([A, np.eye(m)]), b, nstd, tol, max_iters)
    # phase one: maximize -sum(artificials)
    c1 = np.concatenate([np.zeros(nstd), -np.ones(m)])
    status = sx.run(c1, allowed=np.ones(nstd + m, dtype=bool))
    if status != OPTIMAL:
        return LPResult(STALLED, None, None, sx.iters)
    infeas = float(np.sum(sx.values()[nstd:]))
    if infeas > 1e-7 * max(1.0, float(np.abs(b).max())):
        return LPResult(INFEASIBLE, None, None, sx.iters)
    sx.drive_out_artificials()
    allowed = np.concatenate([np.ones(nstd, dtype=bool), np.zeros(m, dtype=bool)])
    c2 = np.concatenate([cz, np.zeros(m)])
    status = sx.run(c2, allowed=allowed)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, sx.iters)
    if status != OPTIMAL:
        return LPResult(STALLED, None, None, sx.iters)
    z = sx.values()[:nz]
    x = offset + T @ z
    return LPResult(OPTIMAL, x, float(c @ x), sx.iters)


class _Simplex:
    """Revised simplex on ``A x = b, x >= 0`` with an explicit basis inverse.

    The last ``m`` columns are artificials forming the starting basis.
    """

    REFACTOR_EVERY = 64

    def __init__(self, A, b, n_real, tol, max_iters):
        self.A = A
        self.b = b
        self.m = A.shape[0]
        self.n_real = n_real
        self.tol = tol
        self.max_iters = max_iters
        self.basis = list(range(n_real, n_real + self.m))
        self.Binv = np.eye(self.m)
        self.xB = b.copy()
        self.iters = 0
        self._since_refactor = 0

    def values(self):
        x = np.zeros(self.A.shape[1])
        x[self.basis] = np.maximum(self.xB, 0.0)
        return x

    def _refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xB = self.Binv @ self.b
        self._since_refactor = 0

    def _pivot(self, r, j, u):
        piv = u[r]
        self.Binv[r] /= piv
        self.xB[r] /= piv
        others = np.arange(self.m) != r
        self.Binv[others] -= np.outer(u[others], self.Binv[r])
        self.xB[others] -= u[others] * self.xB[r]
        self.basis[r] = j
        self.iters += 1
        self._since_refactor += 1
        if self._since_refactor >= self.REFACTOR_EVERY:
            self._refactor()

    def run(self, cost, allowed) -> str:
        while True:
            if self.iters >= self.max_iters:
                return STALLED
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            d[self.basis] = 0.0
            cand = np.flatnonzero((d > self.tol) & allowed)
            if len(cand) == 0:
                return OPTIMAL
            j = int(cand[0])  # Bland: lowest eligible index enters
            u = self.Binv @ self.A[:, j]
            rows = np.flatnonzero(u > self.tol)
            if len(rows) == 0:
                return UNBOUNDED
            ratios = np.maximum(self.xB[rows], 0.0) / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + self.tol * max(1.0, best)]
            r = min(ties, key=lambda i: self.basis[i])  # Bland: lowest leaving index
            self._pivot(int(r), j, u)

    def drive_out_artificials(self):
        for r in range(self.m):
            if self.basis[r] < self.n_real:
                continue
            row = self.Binv[r] @ self.A[:, : self.n_real]
            nonbasic = np.ones(self.n_real, dtype=bool)
            nonbasic[[k for k in self.basis if k < self.n_real]] = False
            cand = np.flatnonzero((np.abs(row) > self.tol) & nonbasic)
            if len(cand):
                j = int(cand[0])
                self._pivot(r, j, self.Binv @ self.A[:, j])
            # else: redundant row, the artificial stays basic at zero
