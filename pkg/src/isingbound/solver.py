"""Kelley cutting-plane maximization of energy + augmented mean-field entropy over SA(k).

The master LP maximizes the pair energy plus an epigraph variable ``theta``
capped by tangent cuts of the concave seed objectives. Each cut overestimates
the surrogate on the whole polytope, so every master value is an upper bound
on log Z, converged or not.

Two master formulations describe the same polytope:

* ``"moments"``: one variable per nonempty subset of size <= k (the Fourier
  coefficient of every table containing it). Normalization and consistency
  hold by construction, only top-level nonnegativity rows remain. Solved
  incrementally with HiGHS, which re-optimizes from the previous basis after
  each cut.
* ``"tables"``: the table entries themselves with the explicit
  normalization/marginalization equalities of :func:`sa_constraints`,
  re-solved from scratch by :func:`lp_solve` each round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .entropy import DEFAULT_FLOOR, EntropyCut, entropy_cut, mean_field_cut_at_uniform, surrogate_entropy
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, lp_solve
from .model import IsingModel
from .pseudomarginals import PseudoMarginals, SAIndex, Subset, assignment_spins, sa_constraints, sa_index

_CLAMP_TOL = 1e-7


class RelaxationError(RuntimeError):
    """The master LP failed: infeasible (a constraint bug) or numerically stalled."""


class LPStall(RelaxationError):
    pass


@dataclass(frozen=True)
class RelaxationOptions:
    seed_size: int = 0
    tol: float = 1e-6
    max_iters: int = 200
    floor: float = DEFAULT_FLOOR
    stabilization: float = 0.5
    master: str = "moments"
    lp_method: str = "highs"

    def __post_init__(self):
        if self.seed_size < 0:
            raise ValueError("seed_size must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        if not 0.0 < self.stabilization <= 1.0:
            raise ValueError("stabilization must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.master not in ("moments", "tables"):
            raise ValueError(f"unknown master formulation {self.master!r}")
        if self.lp_method not in ("highs", "simplex"):
            raise ValueError(f"unknown LP method {self.lp_method!r}")


@dataclass
class TraceEntry:
    master: float
    surrogate: float
    objective: float
    seed: Subset
    floor_error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "master": self.master,
            "surrogate": self.surrogate,
            "objective": self.objective,
            "seed": list(self.seed),
            "floor_error": self.floor_error,
        }


@dataclass
class BoundCertificate:
    upper_bound: float
    iterations: int
    trace: List[TraceEntry]
    converged: bool
    level: int
    seed_size: int
    best_objective: float = -math.inf
    max_clamp: float = 0.0
    max_floor_error: float = 0.0
    incumbent: Optional[PseudoMarginals] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "upper_bound": self.upper_bound,
            "converged": self.converged,
            "iterations": self.iterations,
            "level": self.level,
            "seed_size": self.seed_size,
            "best_objective": self.best_objective,
            "max_clamp": self.max_clamp,
            "max_floor_error": self.max_floor_error,
            "trace": [e.to_dict() for e in self.trace],
        }


def relaxation_level(n: int, seed_size: int) -> int:
    """SA level used for a seed size: conditioned pair statistics need |S| + 2 vertices."""
    return min(seed_size + 2, n)


def energy_coefficients(model: IsingModel, index: SAIndex) -> np.ndarray:
    """Table-coordinate costs of sum_{i != j} J_ij E[x_i x_j]."""
    c = np.zeros(index.ncols)
    if index.k < 2:
        if np.any(model.couplings != 0):
            raise ValueError("pair energy needs level >= 2")
        return c
    sign = np.array([1.0, -1.0, -1.0, 1.0])
    for i, j in combinations(range(model.n), 2):
        if model.couplings[i, j] != 0.0:
            c[index.columns((i, j))] = 2.0 * model.couplings[i, j] * sign
    return c


def pair_energy(model: IsingModel, pm: PseudoMarginals) -> float:
    total = 0.0
    for i, j in combinations(range(model.n), 2):
        Jij = model.couplings[i, j]
        if Jij != 0.0:
            t = pm.table((i, j))
            total += 2.0 * Jij * float(t[0] - t[1] - t[2] + t[3])
    return total


def cut_vector(cut: EntropyCut, index: SAIndex) -> sp.csr_matrix:
    cols, vals = [], []
    for T, g in cut.coefficients.items():
        cols.append(index.columns(T))
        vals.append(g)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (np.zeros(len(cols), dtype=int), cols)), shape=(1, index.ncols))


def moment_map(index: SAIndex) -> Tuple[sp.csr_matrix, np.ndarray]:
    """(P, p0) with table vector = P @ moments + p0, moments ordered like index.subsets."""
    pos = {S: r for r, S in enumerate(index.subsets)}
    rows, cols, vals = [], [], []
    p0 = np.zeros(index.ncols)
    for T in index.subsets:
        m = len(T)
        X = assignment_spins(m)
        start = index.offsets[T]
        scale = 1.0 / (1 << m)
        p0[start:start + (1 << m)] = scale
        for size in range(1, m + 1):
            for sub in combinations(range(m), size):
                chi = np.prod(X[:, list(sub)], axis=1)
                U = tuple(T[b] for b in sub)
                rows.extend(range(start, start + (1 << m)))
                cols.extend([pos[U]] * (1 << m))
                vals.extend(scale * chi)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(index.ncols, len(index.subsets)))
    return P, p0


class _TableMaster:
    def __init__(self, model: IsingModel, index: SAIndex, lp_method: str):
        self.index = index
        cs = sa_constraints(index.n, index.k)
        self.A_eq = sp.hstack([cs.matrix(), sp.csr_matrix((len(cs.rows), 1))]).tocsr()
        self.b_eq = cs.rhs
        self.cost = np.append(energy_coefficients(model, index), 1.0)
        self.bounds = [(0.0, None)] * index.ncols + [(0.0, model.n * math.log(2.0))]
        self.cut_rows: List[sp.csr_matrix] = []
        self.cut_rhs: List[float] = []
        self.lp_method = lp_method

    def add_cut(self, cut: EntropyCut):
        # theta - g @ x <= constant
        g = cut_vector(cut, self.index)
        self.cut_rows.append(sp.hstack([-g, sp.csr_matrix(np.ones((1, 1)))]).tocsr())
        self.cut_rhs.append(cut.constant)

    def solve(self):
        A_ub = sp.vstack(self.cut_rows).tocsr()
        A_eq, A_ub_ = self.A_eq, A_ub
        if self.lp_method == "simplex":
            A_eq, A_ub_ = A_eq.toarray(), A_ub.toarray()
        res = lp_solve(self.cost, A_eq, self.b_eq, A_ub_, np.array(self.cut_rhs), self.bounds, method=self.lp_method)
        _check_status(res.status)
        return res.x[:-1], float(res.x[-1]), res.value


class _MomentMaster:
    def __init__(self, model: IsingModel, index: SAIndex, lp_method: str):
        self.index = index
        self.lp_method = lp_method
        self.P, self.p0 = moment_map(index)
        self.P_T = self.P.T.tocsr()
        nmom = len(index.subsets)
        self.nvar = nmom + 1
        c_tab = energy_coefficients(model, index)
        self.cost = np.append(self.P_T @ c_tab, 1.0)
        self.cost_const = float(c_tab @ self.p0)
        self.theta_cap = model.n * math.log(2.0)
        # top-level nonnegativity: sum_U chi_U(a) y_U >= -1
        top = [T for T in index.subsets if len(T) == index.k]
        top_rows = np.concatenate([index.columns(T) for T in top])
        scale = float(1 << index.k)
        A = (self.P[top_rows] * scale).tocsr()
        self.A_top = sp.hstack([A, sp.csr_matrix((A.shape[0], 1))]).tocsr()
        self.lo_top = np.full(A.shape[0], -1.0)
        self.cut_rows: List[Tuple[np.ndarray, np.ndarray]] = []
        self.cut_rhs: List[float] = []
        self._highs = None
        if lp_method == "highs":
            self._init_highs()

    def _init_highs(self):
        import highspy

        h = highspy.Highs()
        for key, val in (
            ("output_flag", False),
            ("threads", 1),
            ("primal_feasibility_tolerance", 1e-10),
            ("dual_feasibility_tolerance", 1e-10),
            ("random_seed", 0),
        ):
            h.setOptionValue(key, val)
        inf = highspy.kHighsInf
        lp = highspy.HighsLp()
        lp.num_col_ = self.nvar
        lp.num_row_ = self.A_top.shape[0]
        lp.col_cost_ = -self.cost
        lp.col_lower_ = np.append(np.full(self.nvar - 1, -1.0), 0.0)
        lp.col_upper_ = np.append(np.full(self.nvar - 1, 1.0), self.theta_cap)
        lp.row_lower_ = self.lo_top
        lp.row_upper_ = np.full(self.A_top.shape[0], inf)
        Ac = self.A_top.tocsc()
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = Ac.indptr
        lp.a_matrix_.index_ = Ac.indices
        lp.a_matrix_.value_ = Ac.data
        lp.a_matrix_.num_col_ = self.nvar
        lp.a_matrix_.num_row_ = self.A_top.shape[0]
        h.passModel(lp)
        self._highs = h
        self._inf = inf

    def add_cut(self, cut: EntropyCut):
        g = cut_vector(cut, self.index)
        gy = (g @ self.P).tocsr()
        idx = np.append(gy.indices, self.nvar - 1).astype(np.int32)
        val = np.append(-gy.data, 1.0)
        rhs = cut.constant + float((g @ self.p0)[0])
        self.cut_rows.append((idx, val))
        self.cut_rhs.append(rhs)
        if self._highs is not None:
            self._highs.addRow(-self._inf, rhs, len(idx), idx, val)

    def solve(self):
        if self._highs is not None:
            import highspy

            h = self._highs
            h.run()
            status = h.getModelStatus()
            if status == highspy.HighsModelStatus.kInfeasible:
                _check_status(INFEASIBLE)
            if status == highspy.HighsModelStatus.kUnbounded:
                _check_status(UNBOUNDED)
            if status != highspy.HighsModelStatus.kOptimal:
                raise LPStall(f"HiGHS stopped with status {h.modelStatusToString(status)}")
            sol = np.array(h.getSolution().col_value)
        else:
            rows = [sp.csr_matrix((v, (np.zeros(len(i), dtype=int), i)), shape=(1, self.nvar)) for i, v in self.cut_rows]
            A_ub = sp.vstack([-self.A_top] + rows).toarray()
            b_ub = np.concatenate([-self.lo_top, self.cut_rhs])
            bounds = [(-1.0, 1.0)] * (self.nvar - 1) + [(0.0, self.theta_cap)]
            res = lp_solve(self.cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method=self.lp_method)
            _check_status(res.status)
            sol = res.x
        y, theta = sol[:-1], float(sol[-1])
        x = self.P @ y + self.p0
        return x, theta, float(self.cost @ sol) + self.cost_const


def _check_status(status: str):
    if status == OPTIMAL:
        return
    if status == INFEASIBLE:
        raise RelaxationError("master LP is infeasible; the SA constraint system is inconsistent")
    if status == UNBOUNDED:
        raise RelaxationError("master LP is unbounded; theta must be capped")
    raise LPStall(f"master LP stalled ({status})")


def solve_relaxation(model: IsingModel, opts: RelaxationOptions = RelaxationOptions()):
    """Run the cutting-plane loop; returns (final master pseudo-marginals, certificate).

    Each round solves the master, scores the LP point with the surrogate and
    adds one tangent cut. With ``stabilization = a < 1`` the cut is taken at
    ``a * master_point + (1 - a) * incumbent`` (the best point found so far),
    falling back to the master point itself when that cut would not separate
    it; ``a = 1`` is plain Kelley. Convergence means the master value is
    within ``tol`` of the incumbent's energy + surrogate.
    """
    t = opts.seed_size
    if t + 1 > model.n:
        raise ValueError(f"seed_size {t} needs at least {t + 1} vertices, model has {model.n}")
    level = relaxation_level(model.n, t)
    index = sa_index(model.n, level)
    master_cls = _MomentMaster if opts.master == "moments" else _TableMaster
    master = master_cls(model, index, opts.lp_method)
    master.add_cut(mean_field_cut_at_uniform(model.n))

    def score(x):
        pm = PseudoMarginals.from_vector(index, x, clamp_tol=_CLAMP_TOL)
        h, S = surrogate_entropy(pm, t)
        return pm, h, S, pair_energy(model, pm) + h

    trace: List[TraceEntry] = []
    converged = False
    max_clamp = max_floor = 0.0
    pm = incumbent = None
    center = None
    best_obj = -math.inf
    for _ in range(opts.max_iters):
        x, theta, value = master.solve()
        pm, h, S, obj = score(x)
        max_clamp = max(max_clamp, pm.max_clamp)
        entry = TraceEntry(value, h, obj, S)
        trace.append(entry)
        if obj > best_obj:
            best_obj, incumbent, center = obj, pm, x
        if theta - h <= opts.tol or value - best_obj <= opts.tol:
            converged = True
            break
        cut = None
        if opts.stabilization < 1.0 and center is not x:
            x_sep = opts.stabilization * x + (1.0 - opts.stabilization) * center
            pm_sep, _, S_sep, obj_sep = score(x_sep)
            if obj_sep > best_obj:
                best_obj, incumbent, center = obj_sep, pm_sep, x_sep
            candidate = entropy_cut(pm_sep, S_sep, opts.floor)
            if candidate.evaluate(pm) < theta - 0.5 * opts.tol:
                cut = candidate
        if cut is None:
            cut = entropy_cut(pm, S, opts.floor)
        entry.floor_error = cut.floor_error
        max_floor = max(max_floor, cut.floor_error)
        master.add_cut(cut)

    upper = min(e.master for e in trace)
    cert = BoundCertificate(upper, len(trace), trace, converged, level, t, best_obj, max_clamp, max_floor, incumbent)
    return pm, cert
