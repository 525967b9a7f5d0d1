"""Brute-force oracle over all 2^n spin configurations.

Configuration index convention: bit ``b`` of the index is the spin of vertex
``b`` (0 -> -1, 1 -> +1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import IsingModel

MAX_N_LOG_Z = 25
MAX_N_TABLE = 20
_CHUNK_BITS = 16


class EnumerationError(ValueError):
    pass


def spin_configurations(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Spins (+-1, float64) for configuration indices in [start, stop)."""
    stop = 1 << n if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return 2.0 * bits - 1.0


@dataclass(frozen=True, eq=False)
class DenseDistribution:
    n: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (1 << self.n,):
            raise ValueError(f"need {1 << self.n} probabilities for n={self.n}, got shape {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n: int) -> "DenseDistribution":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def point_mass(cls, n: int, index: int) -> "DenseDistribution":
        p = np.zeros(1 << n)
        p[index] = 1.0
        return cls(n, p)

    @classmethod
    def from_weights(cls, n: int, weights) -> "DenseDistribution":
        w = np.asarray(weights, dtype=np.float64)
        return cls(n, w / w.sum())

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-np.sum(p * np.log(p)))


def _chunks(n: int):
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        yield start, min(total, start + step)


def exact_log_z(model: IsingModel) -> float:
    """log sum_x exp(E(x)) by chunked log-sum-exp; fixed chunk order keeps it bit-stable."""
    if model.n > MAX_N_LOG_Z:
        raise EnumerationError(f"exact log Z is limited to n <= {MAX_N_LOG_Z}, got {model.n}")
    partial = []
    for a, b in _chunks(model.n):
        e = model.energy(spin_configurations(model.n, a, b))
        top = float(e.max())
        partial.append(top + float(np.log(np.sum(np.exp(e - top)))))
    partial = np.array(partial)
    top = float(partial.max())
    return top + float(np.log(np.sum(np.exp(partial - top))))


def exact_distribution(model: IsingModel) -> DenseDistribution:
    if model.n > MAX_N_TABLE:
        raise EnumerationError(f"exact distribution is limited to n <= {MAX_N_TABLE}, got {model.n}")
    e = model.energy(spin_configurations(model.n))
    w = np.exp(e - e.max())
    return DenseDistribution(model.n, w / w.sum())


def exact_marginal(dist: DenseDistribution, S: Sequence[int]) -> np.ndarray:
    """Marginal table over the vertices of ``S`` in the order given.

    Entry index bit ``b`` is the spin of ``S[b]``.
    """
    S = [int(v) for v in S]
    if len(set(S)) != len(S):
        raise ValueError(f"duplicate vertices in {S}")
    if any(not 0 <= v < dist.n for v in S):
        raise ValueError(f"vertex out of range in {S} for n={dist.n}")
    idx = np.arange(1 << dist.n, dtype=np.int64)
    local = np.zeros(1 << dist.n, dtype=np.int64)
    for b, v in enumerate(S):
        local |= ((idx >> v) & 1) << b
    return np.bincount(local, weights=dist.probs, minlength=1 << len(S))


def free_energy(dist: DenseDistribution, model: IsingModel) -> float:
    """Expected energy plus Shannon entropy (nats) of an explicit distribution."""
    if dist.n != model.n:
        raise ValueError(f"distribution has n={dist.n}, model has n={model.n}")
    x = spin_configurations(model.n)
    second = (x * dist.probs[:, None]).T @ x
    return float(np.sum(model.couplings * second)) + dist.entropy()
