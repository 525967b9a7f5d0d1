import math

import numpy as np
import pytest

from isingbound.curie_weiss import GRID_POINTS, binary_entropy, cw_analytic, cw_levelsum, magnetization_objective
from isingbound.exact import exact_log_z
from isingbound.model import CurieWeiss, generate

LOG2 = math.log(2)
GRID_STEP = 2.0 / (GRID_POINTS - 1)


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(LOG2)
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0


class TestAnalytic:
    def test_zero_coupling(self):
        r = cw_analytic(7, 0.0)
        assert r.log_z == pytest.approx(7 * LOG2) and r.m_star == pytest.approx(0.0, abs=1e-9)
        assert r.method == "analytic"

    def test_strong_coupling(self):
        r = cw_analytic(1000, 10.0)
        assert r.log_z / 1000 == pytest.approx(10.0, abs=1e-3)
        assert abs(r.m_star) > 0.99

    def test_matches_level_sum(self):
        assert cw_analytic(2000, 1.0).log_z == pytest.approx(cw_levelsum(2000, 1.0), rel=0.01)

    @pytest.mark.parametrize("J", [-2.0, 0.2, 0.5, 0.6, 1.5, 3.0])
    def test_maximizer_beats_neighbours(self, J):
        r = cw_analytic(10, J)
        f = magnetization_objective(r.m_star, J)
        for m in (r.m_star - GRID_STEP, r.m_star + GRID_STEP):
            if -1 <= m <= 1:
                assert f >= magnetization_objective(m, J)

    @pytest.mark.parametrize("J", [0.3, 0.7, 2.0])
    def test_symmetry(self, J):
        for m in np.linspace(-1, 1, 21):
            assert magnetization_objective(m, J) == pytest.approx(magnetization_objective(-m, J), abs=1e-15)

    def test_paramagnetic_phase(self):
        # below J = 1/2 the quadratic term cannot beat the entropy curvature at m = 0
        assert cw_analytic(100, 0.4).m_star == pytest.approx(0.0, abs=1e-6)
        assert abs(cw_analytic(100, 0.8).m_star) > 0.5

    def test_invalid(self):
        with pytest.raises(ValueError):
            cw_analytic(0, 1.0)
        with pytest.raises(ValueError):
            cw_analytic(3, math.inf)

    @pytest.mark.parametrize("J", [0.3, 0.6, 1.5])
    def test_convergence_in_n(self, J):
        err = [abs(cw_analytic(n, J).log_z - cw_levelsum(n, J, True)) / n for n in (50, 200, 1000, 5000)]
        assert all(b < a for a, b in zip(err, err[1:]))


class TestLevelSum:
    def test_two_spins_with_diagonal(self):
        assert cw_levelsum(2, 1.0, True) == pytest.approx(math.log(2 * math.e**2 + 2), abs=1e-12)
        # l in {-2, 0, 2} with multiplicities (1, 2, 1)
        assert cw_levelsum(2, 1.0, True) == pytest.approx(math.log(math.e**2 + 2 + math.e**2), abs=1e-12)

    @pytest.mark.parametrize("J", [-1.0, 0.0, 2.5])
    def test_single_spin(self, J):
        assert cw_levelsum(1, J, True) == pytest.approx(J + LOG2)

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 12])
    @pytest.mark.parametrize("J", [-1.0, 0.3, 1.0])
    def test_matches_enumeration(self, n, J):
        assert cw_levelsum(n, J) == pytest.approx(exact_log_z(generate(CurieWeiss(n, J), 0)), abs=1e-9)

    def test_diagonal_shift(self):
        assert cw_levelsum(6, 0.7, True) - cw_levelsum(6, 0.7, False) == pytest.approx(0.7)

    def test_large_n_finite(self):
        assert np.isfinite(cw_levelsum(100_000, 1.5))

    def test_invalid(self):
        with pytest.raises(ValueError):
            cw_levelsum(0, 1.0)
