"""Entropy surrogates over pseudo-marginals and their tangent cuts.

For a seed set ``S`` the seed objective is

    f_S(mu) = H(mu_S) + sum_{i not in S} H(mu_i | mu_S),

with ``H(mu_i | mu_S) = sum_x mu_{S+i}(x) log(mu_S(x_S) / mu_{S+i}(x))`` evaluated on
the stored tables. Treating every table entry as an independent variable,
``f_S`` is jointly concave on the nonnegative orthant, so a tangent plane taken
at any positive point overestimates it everywhere. The augmented mean-field
surrogate is the minimum of ``f_S`` over all ``|S| <= t``; the mean-field
surrogate is ``f_{()}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .pseudomarginals import PseudoMarginals, PseudoMarginalError, Subset, _flatten, _tensor

DEFAULT_FLOOR = 1e-9
_TIE_TOL = 1e-12


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=np.float64)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def local_entropy(table) -> float:
    """Shannon entropy (nats) of a probability table, 0 log 0 = 0."""
    p = np.asarray(table, dtype=np.float64)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"table sums to {p.sum():.12g}, expected 1")
    return float(max(0.0, -_xlogx(np.maximum(p, 0.0)).sum()))


def _split(pm: PseudoMarginals, S: Subset, i: int) -> np.ndarray:
    """mu_{S+i} as an array of shape (2^|S|, 2): row = seed assignment, column = x_i."""
    U = tuple(sorted(S + (i,)))
    t = _tensor(pm.table(U), len(U))
    axes = [U.index(v) for v in S][::-1] + [U.index(i)]
    return t.transpose(axes).reshape(-1, 2)


def _conditional_raw(joint: np.ndarray, seed: np.ndarray) -> float:
    # sum mu_{S+i} log(mu_S / mu_{S+i}); terms with mu_{S+i} = 0 vanish
    denom = np.broadcast_to(seed[:, None], joint.shape)
    pos = joint > 0
    if not np.any(pos):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.sum(joint[pos] * (np.log(denom[pos]) - np.log(joint[pos]))))


def _seed_table(pm: PseudoMarginals, S: Subset) -> np.ndarray:
    return np.ones(1) if not S else np.asarray(pm.table(S))


def conditional_entropy(pm: PseudoMarginals, i: int, S: Sequence[int]) -> float:
    """H(mu_i | mu_S) = sum_{x_S} mu_S(x_S) H(mu_i | x_S), from the table of S + {i}."""
    S = tuple(sorted(int(v) for v in S))
    if i in S:
        raise PseudoMarginalError(f"vertex {i} is in the conditioning set {S}")
    if len(S) + 1 > pm.level:
        raise PseudoMarginalError(f"H(mu_{i}|mu_S) with |S|={len(S)} needs level >= {len(S) + 1}")
    joint = np.maximum(_split(pm, S, i), 0.0)
    return max(0.0, _conditional_raw(joint, joint.sum(axis=1)))


def seed_objective(pm: PseudoMarginals, S: Sequence[int], raw: bool = False) -> float:
    """f_S(mu) = H(mu_S) + sum_{i not in S} H(mu_i | mu_S).

    By default each conditional term takes its seed marginal from the table of
    S + {i}, which is robust to round-off on consistent tables. With
    ``raw=True`` the stored mu_S table is the denominator instead: that is the
    function of independent table entries whose gradient :func:`entropy_cut`
    returns.
    """
    S = tuple(sorted(int(v) for v in S))
    if len(S) + 1 > pm.level and len(S) < pm.n:
        raise PseudoMarginalError(f"seed set of size {len(S)} needs level >= {len(S) + 1}")
    seed = np.maximum(_seed_table(pm, S), 0.0)
    total = -float(_xlogx(seed).sum()) if S else 0.0
    for i in range(pm.n):
        if i not in S:
            joint = np.maximum(_split(pm, S, i), 0.0)
            total += _conditional_raw(joint, seed if raw else joint.sum(axis=1))
    return total


def candidate_seeds(n: int, t: int):
    """All seed sets of size <= t in lexicographic order (the empty set first)."""
    return sorted(S for size in range(0, t + 1) for S in combinations(range(n), size))


def surrogate_entropy(pm: PseudoMarginals, seed_size: Optional[int] = None) -> Tuple[float, Subset]:
    """Mean-field surrogate (``seed_size=None``) or augmented mean-field with seeds up to ``seed_size``.

    Returns the value and the minimizing seed set; near-ties resolve to the
    lexicographically smallest set.
    """
    if seed_size is None:
        return seed_objective(pm, ()), ()
    if seed_size < 0:
        raise ValueError("seed_size must be nonnegative")
    if seed_size + 1 > pm.level and seed_size < pm.n:
        raise PseudoMarginalError(f"seed size {seed_size} needs level >= {seed_size + 1}, got {pm.level}")
    best_val, best_S = math.inf, ()
    for S in candidate_seeds(pm.n, min(seed_size, pm.n)):
        val = seed_objective(pm, S)
        if val < best_val - _TIE_TOL:
            best_val, best_S = val, S
    return best_val, best_S


@dataclass(frozen=True)
class EntropyCut:
    """Affine overestimator ``constant + sum_T <coefficients[T], mu_T>`` of f_seed."""

    seed: Subset
    constant: float
    coefficients: Dict[Subset, np.ndarray]
    floor_error: float = 0.0

    def evaluate(self, pm: PseudoMarginals) -> float:
        return self.constant + sum(float(g @ pm.table(T)) for T, g in self.coefficients.items())


def entropy_cut(pm: PseudoMarginals, S: Sequence[int], floor: float = DEFAULT_FLOOR) -> EntropyCut:
    """Tangent plane of f_S at ``pm`` with entries clamped below at ``floor``.

    The plane touches f_S at the clamped point, so it stays a true
    overestimator; at the unclamped point it exceeds f_S by ``floor_error``
    (zero when no entry is below the floor).
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    S = tuple(sorted(int(v) for v in S))
    if len(S) + 1 > pm.level:
        raise PseudoMarginalError(f"seed set of size {len(S)} needs level >= {len(S) + 1}")
    coeffs: Dict[Subset, np.ndarray] = {}
    value = 0.0  # f_S at the clamped point
    seed_q = np.ones(1)
    seed_grad = np.zeros(1)
    if S:
        seed_q = np.maximum(np.asarray(pm.table(S), dtype=np.float64), floor)
        seed_grad = -(1.0 + np.log(seed_q))
        value -= float(np.sum(seed_q * np.log(seed_q)))
    for i in range(pm.n):
        if i in S:
            continue
        U = tuple(sorted(S + (i,)))
        q = np.maximum(np.asarray(pm.table(U), dtype=np.float64), floor)
        # same (seed assignment, x_i) layout as _split
        t = _tensor(q, len(U))
        axes = [U.index(v) for v in S][::-1] + [U.index(i)]
        joint = t.transpose(axes).reshape(-1, 2)
        ratio = joint / seed_q[:, None]
        value -= float(np.sum(joint * np.log(ratio)))
        g_joint = -(1.0 + np.log(ratio))
        seed_grad = seed_grad + joint.sum(axis=1) / seed_q
        # scatter the gradient back to the flat layout of U
        g_t = g_joint.reshape([2] * len(U)).transpose(np.argsort(axes))
        coeffs[U] = _flatten(g_t)
    if S:
        coeffs[S] = seed_grad
    constant = value - sum(float(g @ _clamped(pm, T, floor)) for T, g in coeffs.items())
    cut = EntropyCut(S, constant, coeffs)
    err = cut.evaluate(pm) - seed_objective(pm, S)
    return EntropyCut(S, constant, coeffs, max(0.0, err))


def _clamped(pm: PseudoMarginals, T: Subset, floor: float) -> np.ndarray:
    return np.maximum(np.asarray(pm.table(T), dtype=np.float64), floor)


def mean_field_cut_at_uniform(n: int) -> EntropyCut:
    """MF tangent at the uniform point; on normalized tables it equals n log 2."""
    g = -(1.0 + math.log(0.5))
    coeffs = {(i,): np.full(2, g) for i in range(n)}
    return EntropyCut((), n * math.log(2.0) - n * g, coeffs)
