"""Certified upper and lower bounds on Ising log-partition functions.

The upper bound maximizes pair energy plus an augmented mean-field entropy
surrogate over a Sherali-Adams polytope by cutting planes; the lower bound
rounds the resulting pseudo-marginals to an explicit distribution by
conditioning on a seed set.
"""

from .curie_weiss import CwResult, cw_analytic, cw_levelsum
from .entropy import EntropyCut, conditional_entropy, entropy_cut, local_entropy, seed_objective, surrogate_entropy
from .exact import DenseDistribution, EnumerationError, exact_distribution, exact_log_z, exact_marginal, free_energy
from .model import (
    CurieWeiss,
    DenseRandom,
    IsingModel,
    ModelError,
    RegularPM,
    adjacency_matrix,
    density,
    generate,
    jacobi_eigenvalues,
    load_model,
    new_model,
    regularity,
    save_model,
    threshold_rank,
)
from .pseudomarginals import PseudoMarginalError, PseudoMarginals, check_valid, condition, project, sa_constraints
from .rounding import (
    BoundReport,
    RoundedDistribution,
    best_seed,
    bound_report,
    lower_bound,
    round_to_distribution,
    sample,
)
from .solver import BoundCertificate, LPStall, RelaxationError, RelaxationOptions, solve_relaxation

__all__ = [name for name in dir() if not name.startswith("_")]
