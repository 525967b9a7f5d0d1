import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingbound.lp import INFEASIBLE, OPTIMAL, STALLED, UNBOUNDED, lp_solve
from isingbound.pseudomarginals import PseudoMarginals, check_valid, sa_constraints

METHODS = ["simplex", "highs"]


@pytest.mark.parametrize("method", METHODS)
def test_simplex_equality(method):
    res = lp_solve([1.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[1.0], method=method)
    assert res.status == OPTIMAL and res.value == pytest.approx(1.0)


@pytest.mark.parametrize("method", METHODS)
def test_unbounded(method):
    assert lp_solve([1.0], method=method).status == UNBOUNDED


@pytest.mark.parametrize("method", METHODS)
def test_infeasible(method):
    res = lp_solve([1.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[-1.0], method=method)
    assert res.status == INFEASIBLE and res.x is None


@pytest.mark.parametrize("method", METHODS)
def test_bounds_and_free_variables(method):
    # maximize -|x - 3| style: x free, y >= x - 3, y >= 3 - x, maximize -y
    res = lp_solve([0.0, -1.0], A_ub=[[1.0, -1.0], [-1.0, -1.0]], b_ub=[3.0, -3.0], bounds=[(None, None), (None, None)], method=method)
    assert res.ok and res.x[0] == pytest.approx(3.0) and res.value == pytest.approx(0.0, abs=1e-9)
    res = lp_solve([1.0, -1.0], bounds=[(-2.0, 5.0), (-4.0, np.inf)], method=method)
    assert res.ok and res.x == pytest.approx([5.0, -4.0])


def test_degenerate_cycling_example():
    # classic degenerate LP on which the largest-coefficient rule cycles
    c = [0.75, -20.0, 0.5, -6.0]
    A = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    b = [0.0, 0.0, 1.0]
    mine = lp_solve(c, A_ub=A, b_ub=b, method="simplex")
    ref = lp_solve(c, A_ub=A, b_ub=b, method="highs")
    assert mine.ok and mine.value == pytest.approx(ref.value, abs=1e-9)


def test_iteration_limit_is_a_stall():
    res = lp_solve([1.0, 1.0, 1.0], A_ub=np.eye(3), b_ub=np.ones(3), method="simplex", max_iters=1)
    assert res.status == STALLED


def test_nonfinite_cost_rejected():
    with pytest.raises(ValueError):
        lp_solve([np.nan])


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_agrees_with_highs(seed, m, n):
    g = np.random.default_rng(seed)
    A_ub = g.normal(size=(m, n))
    b_ub = g.random(m)  # x = 0 is feasible
    A_eq = g.normal(size=(1, n))
    x0 = g.random(n) * 0.1
    b_eq = A_eq @ x0
    A_ub_full = np.vstack([A_ub, np.eye(n)])
    b_ub_full = np.concatenate([A_ub @ x0 + b_ub, np.full(n, 2.0)])
    c = g.normal(size=n)
    a = lp_solve(c, A_eq, b_eq, A_ub_full, b_ub_full, method="simplex")
    b = lp_solve(c, A_eq, b_eq, A_ub_full, b_ub_full, method="highs")
    assert a.status == b.status == OPTIMAL
    assert a.value == pytest.approx(b.value, abs=1e-7)
    assert np.all(A_ub_full @ a.x <= b_ub_full + 1e-7)
    assert np.abs(A_eq @ a.x - b_eq).max() <= 1e-7


def test_sherali_adams_vertex_valid():
    cs = sa_constraints(3, 2)
    c = np.random.default_rng(4).normal(size=cs.index.ncols)
    a = lp_solve(c, cs.matrix().toarray(), cs.rhs, method="simplex")
    b = lp_solve(c, cs.matrix(), cs.rhs, method="highs")
    assert a.ok and a.value == pytest.approx(b.value, abs=1e-8)
    pm = PseudoMarginals.from_vector(cs.index, a.x)
    assert check_valid(pm, tol=1e-9).valid


def test_redundant_equalities():
    res = lp_solve([1.0, 2.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0], method="simplex")
    assert res.ok and res.value == pytest.approx(2.0)
