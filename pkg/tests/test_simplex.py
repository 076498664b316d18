import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decarb_planner.milp import MilpProblem, solve_lp
from decarb_planner.milp.simplex import LpEngine, reduce_fixed

from oracles import lp_oracle, random_lp

N_RANDOM_LPS = 500


def lp(c, A, senses, rhs, lb, ub):
    c = np.asarray(c, float)
    return MilpProblem(c, np.asarray(A, float).reshape(len(senses), len(c)), tuple(senses),
                       np.asarray(rhs, float), np.asarray(lb, float), np.asarray(ub, float),
                       np.zeros(len(c), bool))


def test_single_bound_active():
    s = solve_lp(lp([1], [[1]], [">="], [3], [0], [10]))
    assert s.status == "optimal"
    assert s.x == pytest.approx([3.0])
    assert s.objective == pytest.approx(3.0)


def test_two_dimensional_vertex():
    s = solve_lp(lp([-1, -1], [[1, 2]], ["<="], [4], [0, 0], [3, 3]))
    assert s.status == "optimal"
    assert s.x == pytest.approx([3.0, 0.5])
    assert s.objective == pytest.approx(-3.5)


def test_vertex_example_matches_oracle():
    assert lp_oracle([-1, -1], [[1, 2]], ["<="], [4], [0, 0], [3, 3]) == ("optimal", -3.5)


def test_empty_feasible_set():
    s = solve_lp(lp([0], [[1], [1]], [">=", "<="], [1, 0], [-np.inf], [np.inf]))
    assert s.status == "infeasible"


def test_unbounded_direction():
    s = solve_lp(lp([-1, 0], [[1, -1]], ["<="], [1], [0, 0], [np.inf, np.inf]))
    assert s.status == "unbounded"


def test_free_variables_and_equalities():
    # min x + y with x - y = 1, x + y >= 3 on free variables -> x=2, y=1
    s = solve_lp(lp([1, 1], [[1, -1], [1, 1]], ["=", ">="], [1, 3], [-np.inf] * 2, [np.inf] * 2))
    assert s.status == "optimal"
    assert s.x == pytest.approx([2.0, 1.0])


def test_no_rows():
    s = solve_lp(lp([2, -1], np.zeros((0, 2)), [], [], [1, -4], [5, 3]))
    assert s.status == "optimal"
    assert s.x == pytest.approx([1.0, 3.0])


def test_dimension_mismatch_is_rejected():
    with pytest.raises(ValueError, match="shape"):
        MilpProblem(np.zeros(2), np.zeros((1, 3)), ("<=",), np.zeros(1), np.zeros(2),
                    np.ones(2), np.zeros(2, bool))
    with pytest.raises(ValueError, match="lb <= ub"):
        lp([1], [[1]], ["<="], [1], [2], [1])


def test_degenerate_problem_terminates():
    # many constraints through the same vertex
    A = np.array([[1, 1], [1, 2], [2, 1], [1, 3], [3, 1], [1, 1]], float)
    s = solve_lp(lp([-1, -1], A, ["<="] * 6, [0] * 6, [0, 0], [np.inf, np.inf]))
    assert s.status == "optimal"
    assert s.objective == pytest.approx(0.0)


def test_basis_description_names_basic_columns():
    s = solve_lp(lp([-1, -1], [[1, 2]], ["<="], [4], [0, 0], [3, 3]))
    assert len(s.basis) == 1


@pytest.mark.parametrize("seed", range(5))
def test_random_lps_match_vertex_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    seen = {"optimal": 0, "infeasible": 0, "unbounded": 0}
    for _ in range(N_RANDOM_LPS // 5):
        c, A, senses, rhs, lb, ub = random_lp(rng)
        ref_status, ref_obj = lp_oracle(c, A, senses, rhs, lb, ub)
        p = lp(c, A, senses, rhs, lb, ub)
        s = solve_lp(p)
        seen[ref_status] += 1
        assert s.status == ref_status
        if ref_status == "optimal":
            assert abs(s.objective - ref_obj) <= 1e-6 * max(1.0, abs(ref_obj))
            assert p.max_violation(s.x) <= 1e-7
    assert all(v > 0 for v in seen.values())


@given(st.integers(0, 2**32 - 1))
def test_optimal_points_are_feasible(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, rhs, lb, ub = random_lp(rng)
    p = lp(c, A, senses, rhs, lb, ub)
    s = solve_lp(p)
    if s.status == "optimal":
        assert p.max_violation(s.x) <= 1e-7
        assert np.all(s.x >= lb - 1e-9) and np.all(s.x <= ub + 1e-9)
        assert s.objective == pytest.approx(float(c @ s.x), abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_warm_start_after_bound_change_matches_cold_start(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, rhs, lb, ub = random_lp(rng, max_vars=6, max_rows=6)
    lb = np.where(np.isfinite(lb), lb, -10.0)
    ub = np.where(np.isfinite(ub), ub, 10.0)
    red = reduce_fixed(lp(c, A, senses, rhs, lb, ub))
    engine = LpEngine(red.c, red.A, red.row_lo, red.row_hi)
    status, x, obj, basis = engine.solve(red.lb, red.ub)
    if status != "optimal" or red.lb.size == 0:
        return
    j = int(rng.integers(red.lb.size))
    # cut the optimum off by tightening one upper bound, as a branch would
    lb2, ub2 = red.lb, red.ub.copy()
    ub2[j] = max(red.lb[j], x[j] - 1.0)
    warm = engine.solve(lb2, ub2, basis)
    cold = LpEngine(red.c, red.A, red.row_lo, red.row_hi).solve(lb2, ub2)
    assert warm[0] == cold[0]
    if warm[0] == "optimal":
        assert warm[2] == pytest.approx(cold[2], rel=1e-9, abs=1e-9)
