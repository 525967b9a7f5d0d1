"""Level-k Sherali-Adams pseudo-distributions.

A level-k pseudo-distribution keeps one local table per sorted vertex subset
``S`` with ``1 <= |S| <= k``. Table entry ``a`` is the probability of the
assignment whose bit ``b`` gives the spin of ``S[b]`` (0 -> -1, 1 -> +1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .exact import DenseDistribution, exact_marginal

Subset = Tuple[int, ...]


class PseudoMarginalError(ValueError):
    pass


def subsets_up_to(n: int, k: int, min_size: int = 1) -> Iterator[Subset]:
    """Sorted subsets of range(n) with min_size <= |S| <= k, by size then lexicographically."""
    for size in range(min_size, k + 1):
        yield from combinations(range(n), size)


# --- table helpers ----------------------------------------------------------

def _tensor(table: np.ndarray, m: int) -> np.ndarray:
    """View a flat table as an m-axis tensor whose axis b is the spin of S[b]."""
    if m == 0:
        return table.reshape(())
    return table.reshape((2,) * m).transpose(tuple(range(m - 1, -1, -1)))


def _flatten(tensor: np.ndarray) -> np.ndarray:
    m = tensor.ndim
    if m == 0:
        return tensor.reshape(1)
    return np.ascontiguousarray(tensor.transpose(tuple(range(m - 1, -1, -1)))).reshape(-1)


def marginalize(table: np.ndarray, S: Subset, keep: Sequence[int]) -> np.ndarray:
    """Marginal of the table over ``S`` onto the vertices ``keep`` (a sorted subset of S)."""
    pos = {v: b for b, v in enumerate(S)}
    drop = tuple(b for v, b in pos.items() if v not in set(keep))
    t = _tensor(np.asarray(table), len(S))
    if drop:
        t = t.sum(axis=drop)
    return _flatten(t)


def restrict(table: np.ndarray, S: Subset, v: int, s: int) -> Tuple[Subset, np.ndarray]:
    """Slice of the table with vertex ``v`` fixed to spin ``s``, over S without v."""
    b = S.index(v)
    t = _tensor(np.asarray(table), len(S))
    t = np.take(t, 1 if s > 0 else 0, axis=b)
    return S[:b] + S[b + 1:], _flatten(t)


def assignment_spins(m: int) -> np.ndarray:
    """(2^m, m) array of +-1 spins, row a, column b = spin of S[b] under assignment a."""
    a = np.arange(1 << m)[:, None]
    return 2.0 * ((a >> np.arange(m)) & 1) - 1.0


# --- LP indexing and constraints --------------------------------------------

@dataclass(frozen=True)
class SAIndex:
    n: int
    k: int
    subsets: Tuple[Subset, ...]
    offsets: Dict[Subset, int]
    ncols: int

    def columns(self, S: Subset) -> np.ndarray:
        start = self.offsets[S]
        return np.arange(start, start + (1 << len(S)))

    def column(self, S: Subset, assignment: int) -> int:
        return self.offsets[S] + assignment


def sa_index(n: int, k: int) -> SAIndex:
    if not 1 <= k <= n:
        raise PseudoMarginalError(f"level must satisfy 1 <= k <= n, got k={k}, n={n}")
    offsets = {}
    col = 0
    subs = tuple(subsets_up_to(n, k))
    for S in subs:
        offsets[S] = col
        col += 1 << len(S)
    return SAIndex(n, k, subs, offsets, col)


@dataclass
class ConstraintSystem:
    """Equality rows ``sum coeffs * x[cols] = rhs`` over nonnegative columns."""

    index: SAIndex
    rows: List[Tuple[np.ndarray, np.ndarray]]
    rhs: np.ndarray
    n_normalization: int
    nonneg: np.ndarray = field(repr=False, default=None)

    @property
    def n_marginalization(self) -> int:
        return len(self.rows) - self.n_normalization

    def matrix(self) -> sp.csr_matrix:
        data, ri, ci = [], [], []
        for r, (cols, coeffs) in enumerate(self.rows):
            ci.append(cols)
            data.append(coeffs)
            ri.append(np.full(len(cols), r))
        return sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
            shape=(len(self.rows), self.index.ncols),
        )

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.matrix() @ x - self.rhs


def sa_constraints(n: int, k: int) -> ConstraintSystem:
    """Normalization rows per subset and drop-one-vertex marginalization rows."""
    idx = sa_index(n, k)
    rows = []
    rhs = []
    for S in idx.subsets:
        cols = idx.columns(S)
        rows.append((cols, np.ones(len(cols))))
        rhs.append(1.0)
    n_norm = len(rows)
    for T in idx.subsets:
        if len(T) < 2:
            continue
        m = len(T)
        tcols = idx.columns(T)
        for b, v in enumerate(T):
            S = T[:b] + T[b + 1:]
            low = (1 << b) - 1
            for a in range(1 << (m - 1)):
                # insert a 0 / 1 bit at position b of the smaller assignment
                a0 = ((a & ~low) << 1) | (a & low)
                a1 = a0 | (1 << b)
                cols = np.array([tcols[a0], tcols[a1], idx.column(S, a)])
                rows.append((cols, np.array([1.0, 1.0, -1.0])))
                rhs.append(0.0)
    return ConstraintSystem(idx, rows, np.array(rhs), n_norm, np.ones(idx.ncols, dtype=bool))


# --- pseudo-marginals -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PseudoMarginals:
    n: int
    level: int
    tables: Dict[Subset, np.ndarray]
    max_clamp: float = 0.0

    def __post_init__(self):
        if not 1 <= self.level <= self.n:
            raise PseudoMarginalError(f"level {self.level} invalid for n={self.n}")
        for S in subsets_up_to(self.n, self.level):
            if S not in self.tables:
                raise PseudoMarginalError(f"missing table for subset {S}")
            if len(self.tables[S]) != 1 << len(S):
                raise PseudoMarginalError(f"table for {S} has wrong length")

    def table(self, S: Sequence[int]) -> np.ndarray:
        key = tuple(sorted(int(v) for v in S))
        try:
            return self.tables[key]
        except KeyError:
            raise PseudoMarginalError(f"no table for subset {key} at level {self.level}") from None

    def mean(self, i: int) -> float:
        t = self.table((i,))
        return float(t[1] - t[0])

    @classmethod
    def from_vector(cls, index: SAIndex, x: np.ndarray, clamp_tol: float = 1e-9) -> "PseudoMarginals":
        """Read LP output; negative round-off is clamped to zero and the worst clamp recorded."""
        x = np.asarray(x, dtype=np.float64)
        worst = float(max(0.0, -x.min())) if len(x) else 0.0
        if worst > clamp_tol:
            raise PseudoMarginalError(f"LP solution has entry {-worst:.3g} below the clamp slack")
        x = np.maximum(x, 0.0)
        tables = {}
        for S in index.subsets:
            t = x[index.columns(S)].copy()
            t.setflags(write=False)
            tables[S] = t
        return cls(index.n, index.k, tables, worst)

    def to_vector(self, index: SAIndex) -> np.ndarray:
        x = np.zeros(index.ncols)
        for S in index.subsets:
            x[index.columns(S)] = self.table(S)
        return x

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "level": self.level,
            "tables": {",".join(map(str, S)): [float(p) for p in t] for S, t in self.tables.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PseudoMarginals":
        tables = {}
        for key, vals in data["tables"].items():
            S = tuple(int(v) for v in key.split(","))
            tables[S] = np.asarray(vals, dtype=np.float64)
        return cls(int(data["n"]), int(data["level"]), tables)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class ValidityReport:
    max_normalization: float
    max_negativity: float
    max_consistency: float
    tol: float

    @property
    def valid(self) -> bool:
        return max(self.max_normalization, self.max_negativity, self.max_consistency) <= self.tol


def check_valid(pm: PseudoMarginals, tol: float = 1e-9) -> ValidityReport:
    norm = neg = cons = 0.0
    for S in subsets_up_to(pm.n, pm.level):
        t = pm.table(S)
        norm = max(norm, abs(float(t.sum()) - 1.0))
        neg = max(neg, float(max(0.0, -t.min())))
        for size in range(1, len(S)):
            for sub in combinations(S, size):
                diff = marginalize(t, S, sub) - pm.table(sub)
                cons = max(cons, float(np.abs(diff).max()))
    return ValidityReport(norm, neg, cons, tol)


def condition(pm: PseudoMarginals, v: int, s: int) -> PseudoMarginals:
    """Condition on spin ``s`` at vertex ``v``; the result has level k-1.

    Tables of subsets containing ``v`` are kept and become consistent with
    the point mass x_v = s.
    """
    if pm.level < 2:
        raise PseudoMarginalError("conditioning needs level >= 2")
    pv = float(pm.table((v,))[1 if s > 0 else 0])
    if pv <= 0.0:
        raise PseudoMarginalError(f"cannot condition on zero-probability spin {s:+d} at vertex {v}")
    tables = {}
    for S in subsets_up_to(pm.n, pm.level - 1):
        if v in S:
            t = pm.table(S).copy()
            b = S.index(v)
            bad = ((np.arange(1 << len(S)) >> b) & 1) != (1 if s > 0 else 0)
            t[bad] = 0.0
        else:
            U = tuple(sorted(S + (v,)))
            _, t = restrict(pm.table(U), U, v, s)
        t = t / pv
        t.setflags(write=False)
        tables[S] = t
    return PseudoMarginals(pm.n, pm.level - 1, tables)


def project(dist: DenseDistribution, k: int) -> PseudoMarginals:
    """True marginals of an explicit distribution, as a level-k pseudo-distribution."""
    if not 1 <= k <= dist.n:
        raise PseudoMarginalError(f"level must satisfy 1 <= k <= n, got k={k}, n={dist.n}")
    tables = {}
    for S in subsets_up_to(dist.n, k):
        t = exact_marginal(dist, S)
        t.setflags(write=False)
        tables[S] = t
    return PseudoMarginals(dist.n, k, tables)


def pair_expectation(pm: PseudoMarginals, i: int, j: int) -> float:
    if i == j:
        raise PseudoMarginalError("pair expectation needs i != j")
    t = pm.table((i, j))
    return float(t[0] - t[1] - t[2] + t[3])
