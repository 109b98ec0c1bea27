import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credalnet.lp import LinearProgram, solve_lp

METHODS = ("highs", "simplex")


@pytest.mark.parametrize("method", METHODS)
def test_bounded_max(method):
    lp = LinearProgram(c=np.array([1.0]), a_ub=np.array([[1.0]]), b_ub=np.array([3.0]))
    res = solve_lp(lp, method)
    assert res.status == "optimal"
    assert res.value == pytest.approx(3.0)


@pytest.mark.parametrize("method", METHODS)
def test_infeasible(method):
    lp = LinearProgram(c=np.array([1.0]), a_ub=np.array([[-1.0], [1.0]]),
                       b_ub=np.array([-1.0, 0.0]))
    assert solve_lp(lp, method).status == "infeasible"


@pytest.mark.parametrize("method", METHODS)
def test_unbounded(method):
    assert solve_lp(LinearProgram(c=np.array([1.0])), method).status == "unbounded"


@pytest.mark.parametrize("method", METHODS)
def test_equality_rows(method):
    # max x0 + 2 x1 on the simplex x0 + x1 + x2 = 1 with x1 <= 0.4
    lp = LinearProgram(c=np.array([1.0, 2.0, 0.0]), a_eq=np.ones((1, 3)), b_eq=np.array([1.0]),
                       upper=np.array([1.0, 0.4, 1.0]))
    res = solve_lp(lp, method)
    assert res.value == pytest.approx(1.4)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(1, 5), st.booleans())
def test_simplex_agrees_with_highs(seed, n, m, maximize):
    rng = np.random.default_rng(seed)
    lp = LinearProgram(c=rng.normal(size=n), a_ub=rng.normal(size=(m, n)),
                       b_ub=rng.uniform(0.1, 2.0, m), lower=np.full(n, -1.0),
                       upper=rng.uniform(0.5, 3.0, n), maximize=maximize)
    a, b = solve_lp(lp, "highs"), solve_lp(lp, "simplex")
    assert a.status == b.status
    if a.status == "optimal":
        assert b.value == pytest.approx(a.value, abs=1e-7)
