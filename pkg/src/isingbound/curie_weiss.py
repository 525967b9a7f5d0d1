"""Curie-Weiss log-partition function: magnetization formula and exact level sum.

With couplings J/n between every pair, the energy depends on x only through
l = sum_i x_i, so Z is a sum over the n + 1 magnetization levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

GRID_POINTS = 1001
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CwResult:
    log_z: float
    m_star: float
    method: str


def binary_entropy(p: float) -> float:
    """Entropy in nats of a coin with bias p."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def magnetization_objective(m: float, J: float) -> float:
    return J * m * m + binary_entropy((1.0 + m) / 2.0)


def _golden_max(f, a: float, b: float, tol: float = 1e-10) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def cw_analytic(n: int, J: float) -> CwResult:
    """n * max_m [J m^2 + H_b((1 + m) / 2)], grid search then golden-section refinement.

    The grid pass picks the right mode when the objective is bimodal.
    """
    if n < 1 or not math.isfinite(J):
        raise ValueError("need n >= 1 and finite J")
    f = lambda m: magnetization_objective(m, J)  # noqa: E731
    grid = np.linspace(-1.0, 1.0, GRID_POINTS)
    vals = [f(m) for m in grid]
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, GRID_POINTS - 1)]
    m = _golden_max(f, lo, hi)
    if f(m) < vals[i]:
        m = float(grid[i])
    return CwResult(float(n * f(m)), float(m), "analytic")


def cw_levelsum(n: int, J: float, include_diagonal: bool = False) -> float:
    """Exact log Z as a log-sum-exp over l in {-n, -n+2, ..., n} of C(n, (n+l)/2) exp(J l^2 / n).

    ``include_diagonal=False`` drops the i = j terms (a constant J), which is
    the zero-diagonal convention of :class:`~isingbound.model.IsingModel`.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    k = np.arange(n + 1)
    l = 2 * k - n
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    value = float(logsumexp(log_binom + J * l.astype(np.float64) ** 2 / n))
    return value if include_diagonal else value - J
