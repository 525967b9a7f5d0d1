import json
import math

import numpy as np
import pytest

from conftest import random_distribution, random_model
from isingbound.exact import exact_distribution, exact_log_z
from isingbound.model import CurieWeiss, DenseRandom, generate, new_model
from isingbound.pseudomarginals import check_valid, project, sa_index, subsets_up_to
from isingbound.solver import (
    LPStall,
    RelaxationError,
    RelaxationOptions,
    _check_status,
    energy_coefficients,
    moment_map,
    pair_energy,
    relaxation_level,
    solve_relaxation,
)

LOG2 = math.log(2)


def solve(model, t, **kw):
    kw.setdefault("max_iters", 500)
    return solve_relaxation(model, RelaxationOptions(seed_size=t, **kw))


class TestOptions:
    @pytest.mark.parametrize(
        "kw",
        [dict(seed_size=-1), dict(tol=0.0), dict(floor=0.0), dict(max_iters=0), dict(stabilization=0.0), dict(master="sdp"), dict(lp_method="x")],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            RelaxationOptions(**kw)

    def test_level(self):
        assert relaxation_level(10, 0) == 2
        assert relaxation_level(10, 2) == 4
        assert relaxation_level(2, 1) == 2

    def test_seed_size_needs_vertices(self):
        with pytest.raises(ValueError):
            solve(new_model(2, [(0, 1, 1.0)]), 2)


class TestLinearPieces:
    def test_pair_energy_matches_exact(self, rng):
        m = random_model(rng, 5)
        dist = exact_distribution(m)
        pm = project(dist, 2)
        X = np.array([[1 if (a >> b) & 1 else -1 for b in range(5)] for a in range(32)])
        want = float(dist.probs @ np.einsum("ai,ij,aj->a", X, m.couplings, X))
        assert pair_energy(m, pm) == pytest.approx(want, abs=1e-12)
        idx = sa_index(5, 2)
        assert energy_coefficients(m, idx) @ pm.to_vector(idx) == pytest.approx(want, abs=1e-12)

    def test_moment_map_reproduces_tables(self, rng):
        dist = random_distribution(rng, 4)
        idx = sa_index(4, 3)
        X = np.array([[1 if (a >> b) & 1 else -1 for b in range(4)] for a in range(16)])
        y = np.array([dist.probs @ np.prod(X[:, list(U)], axis=1) for U in idx.subsets])
        P, p0 = moment_map(idx)
        assert np.allclose(P @ y + p0, project(dist, 3).to_vector(idx), atol=1e-14)


class TestSolve:
    def test_zero_model(self):
        m = new_model(4, [])
        _, cert = solve(m, 0)
        assert cert.converged
        assert cert.upper_bound == pytest.approx(4 * LOG2, abs=1e-6)
        assert exact_log_z(m) == pytest.approx(4 * LOG2)

    def test_two_vertices_mean_field(self):
        # MF lets the pair table align fully while both singletons stay uniform: 2J + 2 log 2
        m = new_model(2, [(0, 1, 0.5)])
        _, cert = solve(m, 0)
        assert cert.converged
        assert cert.upper_bound == pytest.approx(1.0 + 2 * LOG2, abs=1e-6)
        assert cert.upper_bound >= exact_log_z(m)

    def test_two_vertices_exact_with_one_seed(self):
        m = new_model(2, [(0, 1, 0.5)])
        _, cert = solve(m, 1)
        assert cert.converged
        assert abs(cert.upper_bound - exact_log_z(m)) <= 2e-6

    def test_curie_weiss_upper(self):
        m = generate(CurieWeiss(10, 0.2), 0)
        _, cert = solve(m, 1, max_iters=15)
        assert cert.upper_bound >= exact_log_z(m)
        assert not cert.converged and cert.iterations == 15

    @pytest.mark.parametrize("t", [0, 1, 2])
    def test_anytime_and_monotone_trace(self, rng, t):
        for _ in range(3):
            m = random_model(rng, 5, 0.8)
            logz = exact_log_z(m)
            _, cert = solve(m, t, max_iters=40)
            masters = [e.master for e in cert.trace]
            assert min(masters) >= logz - 1e-9
            assert all(b <= a + 1e-9 for a, b in zip(masters, masters[1:]))
            assert cert.upper_bound == pytest.approx(masters[-1], abs=1e-9)

    def test_converged_gap(self):
        m = generate(DenseRandom(4, 0.6), 2)
        pm, cert = solve(m, 1)
        assert cert.converged
        assert cert.upper_bound - cert.best_objective <= 1e-6
        assert check_valid(pm, tol=1e-7).valid
        assert cert.max_clamp <= 1e-7

    def test_nesting_in_seed_size(self):
        m = generate(DenseRandom(4, 0.7), 5)
        ups = [solve(m, t)[1] for t in (0, 1, 2)]
        assert all(c.converged for c in ups)
        for a, b in zip(ups, ups[1:]):
            assert b.upper_bound <= a.upper_bound + 1e-6 + 1e-6

    def test_master_formulations_agree(self):
        m = generate(DenseRandom(4, 0.5), 3)
        a = solve(m, 1)[1]
        b = solve(m, 1, master="tables")[1]
        assert a.converged and b.converged
        assert a.upper_bound == pytest.approx(b.upper_bound, abs=2e-6)

    def test_own_simplex_agrees_with_highs(self):
        m = generate(DenseRandom(3, 0.5), 1)
        a = solve(m, 1)[1]
        b = solve(m, 1, master="tables", lp_method="simplex")[1]
        c = solve(m, 1, lp_method="simplex")[1]
        assert a.converged and b.converged and c.converged
        assert b.upper_bound == pytest.approx(a.upper_bound, abs=2e-6)
        assert c.upper_bound == pytest.approx(a.upper_bound, abs=2e-6)

    def test_plain_kelley(self):
        m = generate(DenseRandom(4, 0.5), 3)
        _, cert = solve(m, 0, stabilization=1.0)
        assert cert.converged and cert.upper_bound >= exact_log_z(m)

    def test_deterministic(self):
        m = generate(DenseRandom(5, 0.6), 9)
        a, b = solve(m, 1, max_iters=30)[1], solve(m, 1, max_iters=30)[1]
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())

    def test_certificate_export(self):
        _, cert = solve(new_model(3, [(0, 1, 0.3)]), 0)
        d = json.loads(json.dumps(cert.to_dict()))
        assert {"upper_bound", "converged", "iterations", "trace"} <= set(d)
        assert {"master", "surrogate", "seed"} <= set(d["trace"][0])
        assert len(d["trace"]) == d["iterations"]

    def test_final_tables_cover_level(self):
        pm, cert = solve(generate(DenseRandom(5, 0.4), 1), 1, max_iters=10)
        assert pm.level == cert.level == 3
        assert set(pm.tables) == set(subsets_up_to(5, 3))


def test_status_errors():
    _check_status("optimal")
    with pytest.raises(RelaxationError):
        _check_status("infeasible")
    with pytest.raises(RelaxationError):
        _check_status("unbounded")
    with pytest.raises(LPStall):
        _check_status("stalled")
