"""Correlation rounding of pseudo-marginals to an explicit distribution, and the bound report.

Conditioning on a seed set ``S`` and drawing every other spin independently
from its conditional gives the distribution

    mu~(x) = mu_S(x_S) * prod_{i not in S} mu(x_i | x_S),

whose energy and entropy are available in closed form from the local tables.
Its Gibbs free energy is therefore a certified lower bound on log Z.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .entropy import candidate_seeds
from .exact import DenseDistribution, spin_configurations
from .model import IsingModel, ModelError, density, regularity
from .pseudomarginals import PseudoMarginals, PseudoMarginalError, Subset, _tensor, assignment_spins
from .rng import SplitMix64
from .solver import BoundCertificate, RelaxationOptions, solve_relaxation


@dataclass(frozen=True, eq=False)
class RoundedDistribution:
    """Seed table plus P(x_i = +1 | x_S) for every seed assignment (rows) and vertex (columns).

    Columns of seed vertices hold the deterministic value implied by the
    assignment, so ``2 * plus - 1`` is the conditional mean of every spin.
    """

    n: int
    seed: Subset
    seed_table: np.ndarray
    plus: np.ndarray

    @property
    def means(self) -> np.ndarray:
        return 2.0 * self.plus - 1.0

    def expand(self) -> DenseDistribution:
        """Full 2^n table; only for small n."""
        if self.n > 20:
            raise ValueError("expansion is limited to n <= 20")
        x = spin_configurations(self.n)
        up = x > 0
        probs = np.zeros(len(x))
        seed_bits = np.zeros(len(x), dtype=np.int64)
        for b, v in enumerate(self.seed):
            seed_bits |= up[:, v].astype(np.int64) << b
        for a in range(len(self.seed_table)):
            if self.seed_table[a] == 0:
                continue
            p = np.where(up, self.plus[a], 1.0 - self.plus[a])
            mask = seed_bits == a
            probs[mask] += self.seed_table[a] * np.prod(p[mask], axis=1)
        return DenseDistribution(self.n, probs / probs.sum())


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    inner = (p > 0) & (p < 1)
    q = p[inner]
    out[inner] = -(q * np.log(q) + (1 - q) * np.log(1 - q))
    return out


def _seed_and_pair(pm: PseudoMarginals, S: Subset, i: int, j: int) -> np.ndarray:
    """mu_{S+i+j} as shape (2^|S|, 2, 2): seed assignment, x_i, x_j."""
    U = tuple(sorted(S + (i, j)))
    t = _tensor(pm.table(U), len(U))
    axes = [U.index(v) for v in S][::-1] + [U.index(i), U.index(j)]
    return np.maximum(t.transpose(axes).reshape(-1, 2, 2), 0.0)


def seed_residual(pm: PseudoMarginals, S: Subset, model: IsingModel) -> float:
    """sum_{x_S} mu_S(x_S) sum_{i != j} |J_ij| |Cov(x_i, x_j | x_S)|."""
    J = model.couplings
    rest = [v for v in range(pm.n) if v not in S]
    total = 0.0
    for a_i, i in enumerate(rest):
        for j in rest[a_i + 1:]:
            if J[i, j] == 0.0:
                continue
            t = _seed_and_pair(pm, S, i, j)
            w = t.sum(axis=(1, 2))
            live = w > 0
            if not np.any(live):
                continue
            t = t[live] / w[live, None, None]
            eij = t[:, 0, 0] + t[:, 1, 1] - t[:, 0, 1] - t[:, 1, 0]
            ei = t[:, 1, :].sum(axis=1) - t[:, 0, :].sum(axis=1)
            ej = t[:, :, 1].sum(axis=1) - t[:, :, 0].sum(axis=1)
            total += 2.0 * abs(J[i, j]) * float(np.sum(w[live] * np.abs(eij - ei * ej)))
    return total


def best_seed(pm: PseudoMarginals, t: int, model: IsingModel) -> Tuple[Subset, float]:
    """Seed set of size <= t with the smallest conditional-covariance residual."""
    if pm.n != model.n:
        raise ValueError("pseudo-marginals and model disagree on n")
    if min(t + 2, pm.n) > pm.level:
        raise PseudoMarginalError(f"seed size {t} needs level >= {min(t + 2, pm.n)}, got {pm.level}")
    best_S, best_r = (), math.inf
    for S in candidate_seeds(pm.n, min(t, pm.n)):
        r = seed_residual(pm, S, model)
        if r < best_r - 1e-12:
            best_S, best_r = S, r
    return best_S, best_r


def round_to_distribution(pm: PseudoMarginals, S) -> RoundedDistribution:
    S = tuple(sorted(int(v) for v in S))
    if len(S) + 1 > pm.level and len(S) < pm.n:
        raise PseudoMarginalError(f"seed set of size {len(S)} needs level >= {len(S) + 1}")
    seed_table = np.maximum(np.asarray(pm.table(S)), 0.0) if S else np.ones(1)
    seed_table = seed_table / seed_table.sum()
    k = len(S)
    plus = np.empty((1 << k, pm.n))
    X = assignment_spins(k)
    for b, v in enumerate(S):
        plus[:, v] = (X[:, b] > 0).astype(float)
    for i in range(pm.n):
        if i in S:
            continue
        U = tuple(sorted(S + (i,)))
        t = _tensor(np.maximum(np.asarray(pm.table(U)), 0.0), len(U))
        axes = [U.index(v) for v in S][::-1] + [U.index(i)]
        joint = t.transpose(axes).reshape(-1, 2)
        w = joint.sum(axis=1)
        # zero-probability seed assignments get a uniform conditional
        plus[:, i] = np.where(w > 0, joint[:, 1] / np.where(w > 0, w, 1.0), 0.5)
    return RoundedDistribution(pm.n, S, seed_table, plus)


def rounded_energy(model: IsingModel, rd: RoundedDistribution) -> float:
    M = rd.means
    per_seed = np.einsum("ai,ij,aj->a", M, model.couplings, M)
    return float(rd.seed_table @ per_seed)


def rounded_entropy(rd: RoundedDistribution) -> float:
    seed = rd.seed_table[rd.seed_table > 0]
    h = -float(np.sum(seed * np.log(seed)))
    rest = [v for v in range(rd.n) if v not in rd.seed]
    if rest:
        h += float(rd.seed_table @ _binary_entropy(rd.plus[:, rest]).sum(axis=1))
    return h


def lower_bound(model: IsingModel, rd: RoundedDistribution) -> float:
    """E[energy] + H of the rounded distribution, in closed form."""
    if model.n != rd.n:
        raise ValueError(f"model has n={model.n}, rounded distribution has n={rd.n}")
    return rounded_energy(model, rd) + rounded_entropy(rd)


def sample(rd: RoundedDistribution, seed: int, size: Optional[int] = None) -> np.ndarray:
    """Draw x_S from the seed table, then the other spins from their conditionals.

    Returns one configuration of +-1 ints, or ``size`` of them stacked.
    """
    rng = SplitMix64(seed)
    count = 1 if size is None else int(size)
    rest = np.array([v for v in range(rd.n) if v not in rd.seed], dtype=np.int64)
    u = rng.uniform_array(count * (1 + len(rest))).reshape(count, 1 + len(rest))
    cdf = np.cumsum(rd.seed_table)
    a = np.minimum(np.searchsorted(cdf, u[:, 0], side="right"), len(cdf) - 1)
    p = rd.plus[a]
    out = np.where(p > 0.5, 1, -1).astype(np.int64)
    if len(rest):
        out[:, rest] = np.where(u[:, 1:] < p[:, rest], 1, -1)
    return out[0] if size is None else out


@dataclass
class BoundReport:
    lower: float
    upper: float
    gap: float
    guarantee: Optional[float]
    delta: Optional[float]
    j_total: float
    j_prime: Optional[float]
    seed_set: Subset
    residual: float
    certificate: BoundCertificate
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "guarantee": self.guarantee,
            "delta": self.delta,
            "j_total": self.j_total,
            "j_prime": self.j_prime,
            "seed_set": list(self.seed_set),
            "residual": self.residual,
            "timings": self.timings,
            "solver": self.certificate.to_dict(),
        }


def bound_report(model: IsingModel, opts: RelaxationOptions = RelaxationOptions()) -> BoundReport:
    """Upper bound from the relaxation, lower bound from rounding its best point."""
    t0 = time.perf_counter()
    pm, cert = solve_relaxation(model, opts)
    t1 = time.perf_counter()
    best = None
    candidates = [pm] if cert.incumbent is None or cert.incumbent is pm else [cert.incumbent, pm]
    for cand in candidates:
        S, residual = best_seed(cand, opts.seed_size, model)
        lb = lower_bound(model, round_to_distribution(cand, S))
        if best is None or lb > best[0]:
            best = (lb, S, residual)
    lower, S, residual = best
    t2 = time.perf_counter()
    try:
        delta = density(model)
    except ModelError:
        delta = None
    t = opts.seed_size
    guarantee = 100.0 / (delta * t) * model.j_total if delta is not None and t >= 1 else None
    upper = cert.upper_bound
    return BoundReport(
        lower=lower,
        upper=upper,
        gap=upper - lower,
        guarantee=guarantee,
        delta=delta,
        j_total=model.j_total,
        j_prime=regularity(model),
        seed_set=S,
        residual=residual,
        certificate=cert,
        timings={"relaxation_ms": 1e3 * (t1 - t0), "rounding_ms": 1e3 * (t2 - t1)},
    )
