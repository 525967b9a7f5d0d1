import itertools
import math

import numpy as np
import pytest

from isingbound.exact import DenseDistribution
from isingbound.model import IsingModel


def random_distribution(rng: np.random.Generator, n: int, sparsity: float = 0.0) -> DenseDistribution:
    """Dirichlet-like random table; ``sparsity`` zeroes a fraction of the states."""
    w = rng.exponential(size=1 << n) ** 2
    if sparsity > 0:
        w[rng.random(1 << n) < sparsity] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    return DenseDistribution(n, w / w.sum())


def random_model(rng: np.random.Generator, n: int, scale: float = 1.0) -> IsingModel:
    J = np.triu(rng.uniform(-scale, scale, size=(n, n)), 1)
    return IsingModel(n, J + J.T)


def brute_log_z(model: IsingModel) -> float:
    """Plain-Python enumeration, independent of the vectorized oracle."""
    n = model.n
    J = model.couplings
    energies = []
    for x in itertools.product((-1, 1), repeat=n):
        energies.append(sum(J[i][j] * x[i] * x[j] for i in range(n) for j in range(n) if i != j))
    top = max(energies)
    return top + math.log(sum(math.exp(e - top) for e in energies))


def config_of_index(a: int, n: int):
    """Spin vector of a dense-table index: bit b set means spin +1 at vertex b."""
    return tuple(1 if (a >> b) & 1 else -1 for b in range(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
