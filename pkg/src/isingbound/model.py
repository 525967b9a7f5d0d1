"""Ising model instances, generators and structural diagnostics.

The energy of a configuration ``x`` in {-1, +1}^n is ``sum_{i != j} J[i, j] x_i x_j``
over ordered pairs, so every unordered edge contributes twice. The diagonal of
``J`` is always zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .rng import SplitMix64


class ModelError(ValueError):
    """Invalid model construction or a diagnostic undefined for the model."""


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Symmetric zero-diagonal coupling matrix. Immutable once built."""

    n: int
    couplings: np.ndarray

    def __post_init__(self):
        J = np.array(self.couplings, dtype=np.float64)
        if self.n < 1:
            raise ModelError(f"vertex count must be positive, got {self.n}")
        if J.shape != (self.n, self.n):
            raise ModelError(f"couplings must have shape {(self.n, self.n)}, got {J.shape}")
        if not np.all(np.isfinite(J)):
            raise ModelError("couplings must be finite")
        if np.any(np.diag(J) != 0.0):
            raise ModelError("couplings must have zero diagonal")
        if not np.array_equal(J, J.T):
            raise ModelError("couplings must be symmetric")
        J.setflags(write=False)
        object.__setattr__(self, "couplings", J)

    @property
    def j_total(self) -> float:
        """Total absolute coupling weight over ordered pairs."""
        return float(np.abs(self.couplings).sum())

    def edges(self) -> list[tuple[int, int, float]]:
        """Nonzero couplings as (i, j, value) with i < j, lexicographic order."""
        iu, ju = np.triu_indices(self.n, k=1)
        vals = self.couplings[iu, ju]
        return [(int(i), int(j), float(v)) for i, j, v in zip(iu, ju, vals) if v != 0.0]

    def energy(self, x: np.ndarray) -> np.ndarray:
        """Energy of one configuration (shape (n,)) or a batch (shape (m, n))."""
        x = np.asarray(x, dtype=np.float64)
        return np.einsum("...i,ij,...j->...", x, self.couplings, x)

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.couplings, other.couplings)

    __hash__ = None


def new_model(n: int, coupling_list: Iterable[Sequence]) -> IsingModel:
    """Build a model from ``(i, j, value)`` triples; every unordered pair at most once."""
    if int(n) != n or n < 1:
        raise ModelError(f"vertex count must be a positive integer, got {n}")
    n = int(n)
    J = np.zeros((n, n))
    seen = set()
    for entry in coupling_list:
        i, j, value = entry
        if int(i) != i or int(j) != j:
            raise ModelError(f"vertex indices must be integers: {entry!r}")
        i, j, value = int(i), int(j), float(value)
        if not (0 <= i < n and 0 <= j < n):
            raise ModelError(f"vertex index out of range in {entry!r} for n={n}")
        if i == j:
            raise ModelError(f"diagonal coupling ({i}, {i}) is not allowed")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ModelError(f"duplicate coupling for pair {key}")
        if not math.isfinite(value):
            raise ModelError(f"non-finite coupling value for pair {key}")
        seen.add(key)
        J[i, j] = J[j, i] = value
    return IsingModel(n, J)


# --- generators -------------------------------------------------------------

@dataclass(frozen=True)
class CurieWeiss:
    n: int
    J: float


@dataclass(frozen=True)
class DenseRandom:
    n: int
    scale: float


@dataclass(frozen=True)
class RegularPM:
    n: int
    d: int
    J: float


GeneratorSpec = Union[CurieWeiss, DenseRandom, RegularPM]

MAX_REGULAR_RETRIES = 10_000


def generate(spec: GeneratorSpec, seed: int) -> IsingModel:
    """Deterministically build a model from a generator descriptor and a 64-bit seed."""
    rng = SplitMix64(seed)
    if isinstance(spec, CurieWeiss):
        _check_n(spec.n)
        if not math.isfinite(spec.J):
            raise ModelError("curie_weiss J must be finite")
        J = np.full((spec.n, spec.n), spec.J / spec.n)
        np.fill_diagonal(J, 0.0)
        return IsingModel(spec.n, J)
    if isinstance(spec, DenseRandom):
        _check_n(spec.n)
        if not (math.isfinite(spec.scale) and spec.scale >= 0):
            raise ModelError("dense_random scale must be finite and nonnegative")
        J = np.zeros((spec.n, spec.n))
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                J[i, j] = J[j, i] = spec.scale * (2.0 * rng.uniform() - 1.0)
        return IsingModel(spec.n, J)
    if isinstance(spec, RegularPM):
        n, d = spec.n, spec.d
        _check_n(n)
        if not (0 <= d < n) or (n * d) % 2:
            raise ModelError(f"regular_pm needs 0 <= d < n and n*d even, got n={n}, d={d}")
        if not math.isfinite(spec.J):
            raise ModelError("regular_pm J must be finite")
        edges = _random_regular_edges(n, d, rng)
        J = np.zeros((n, n))
        for i, j in edges:
            sign = 1.0 if rng.next_u64() >> 63 else -1.0
            J[i, j] = J[j, i] = sign * spec.J
        return IsingModel(n, J)
    raise ModelError(f"unknown generator descriptor {spec!r}")


def _check_n(n):
    if int(n) != n or n < 1:
        raise ModelError(f"vertex count must be a positive integer, got {n}")


def _random_regular_edges(n: int, d: int, rng: SplitMix64) -> list[tuple[int, int]]:
    # Dense targets are drawn as the complement of a sparse regular graph;
    # the configuration model almost never yields a simple graph when d ~ n.
    complement = d > (n - 1) / 2
    deg = n - 1 - d if complement else d
    for _ in range(MAX_REGULAR_RETRIES):
        stubs = [v for v in range(n) for _ in range(deg)]
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for a, b in zip(stubs[0::2], stubs[1::2]):
            e = (min(a, b), max(a, b))
            if a == b or e in edges:
                ok = False
                break
            edges.add(e)
        if ok:
            break
    else:
        raise ModelError(f"no simple {d}-regular graph on {n} vertices after {MAX_REGULAR_RETRIES} tries")
    if complement:
        edges = {(i, j) for i in range(n) for j in range(i + 1, n)} - edges
    return sorted(edges)


# --- diagnostics ------------------------------------------------------------

def density(model: IsingModel) -> float:
    """Largest Delta in (0, 1] with Delta*|J_ij| <= J_T / n^2 for all i != j."""
    biggest = float(np.abs(model.couplings).max())
    if biggest == 0.0:
        raise ModelError("density is undefined for a model without couplings")
    return min(1.0, model.j_total / (model.n ** 2 * biggest))


def regularity(model: IsingModel, tol: float = 1e-9) -> Optional[float]:
    """Common absolute row sum J' if all rows agree within ``tol``, else None."""
    rows = np.abs(model.couplings).sum(axis=1)
    if np.all(np.abs(rows - rows[0]) <= tol):
        return float(rows[0])
    return None


def adjacency_matrix(model: IsingModel, tol: float = 1e-9) -> np.ndarray:
    """Normalized adjacency |J_ij| / J' of a regular model (rows sum to one)."""
    jp = regularity(model, tol)
    if jp is None:
        raise ModelError("adjacency matrix needs a regular model")
    if jp == 0.0:
        raise ModelError("adjacency matrix needs J' > 0")
    return np.abs(model.couplings) / jp


def jacobi_eigenvalues(A: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps over all (p, q) pairs until the Frobenius norm of the off-diagonal
    part drops to ``tol``.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, rtol=0, atol=1e-12):
        raise ModelError("Jacobi eigensolver needs a square symmetric matrix")
    A = 0.5 * (A + A.T)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # theta^2 would overflow; t ~ 1 / (2 theta)
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
    raise ModelError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def threshold_rank(model: IsingModel, tau: float, tol: float = 1e-9) -> int:
    """Number of adjacency eigenvalues >= tau."""
    eig = jacobi_eigenvalues(adjacency_matrix(model, tol))
    return int(np.sum(eig >= tau))


# --- file format ------------------------------------------------------------

def model_to_dict(model: IsingModel) -> dict:
    return {"n": model.n, "couplings": [[i, j, v] for i, j, v in model.edges()]}


def model_from_dict(data: dict) -> IsingModel:
    try:
        n = data["n"]
        entries = data["couplings"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"model JSON needs 'n' and 'couplings': {exc}") from None
    if isinstance(n, bool) or not isinstance(n, int):
        raise ModelError("model JSON 'n' must be an integer")
    for entry in entries:
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ModelError(f"coupling entry must be [i, j, value]: {entry!r}")
        if not entry[0] < entry[1]:
            raise ModelError(f"coupling entry needs i < j: {entry!r}")
    return new_model(n, entries)


def save_model(model: IsingModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n")


def load_model(path) -> IsingModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
