import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from pcycle_planner.cycles import enumerate_simple_cycles
from pcycle_planner.milp import Constraint, build_model, verify_assignment
from pcycle_planner.solver import (
    BUDGET_EXHAUSTED,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    SolveLimits,
    simplex,
    solve_lp,
    solve_milp,
    with_implied_rows,
)

from conftest import load
from oracles import exhaustive_optimum


def model_for(name, method="slp", **kw):
    net = load(name)
    cs = enumerate_simple_cycles(net)
    return net, cs, build_model(net, cs, method, **kw)


# -- simplex ------------------------------------------------------------------


def test_single_lower_bound():
    res = simplex([1.0], [[1.0]], [">="], [3.0])
    assert res.status == OPTIMAL and res.x[0] == pytest.approx(3.0)


def test_zero_row_infeasible():
    assert simplex([1.0], [[0.0]], [">="], [1.0]).status == INFEASIBLE


def test_unbounded():
    assert simplex([-1.0], [[1.0]], [">="], [1.0]).status == UNBOUNDED


def test_equality_and_bounds():
    res = simplex([1.0, 2.0], [[1.0, 1.0]], ["="], [4.0], lb=[0, 1], ub=[2, 5])
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([2.0, 2.0])
    assert simplex([1.0], [[1.0]], [">="], [0.0], lb=[2], ub=[1]).status == INFEASIBLE


def test_ring3_relaxation_is_integral():
    _, _, m = model_for("ring3")
    res = solve_lp(m)
    assert res.status == OPTIMAL and res.objective == pytest.approx(3.0)


@st.composite
def random_lps(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 5))
    ints = st.integers(-4, 4)
    c = draw(st.lists(st.integers(-3, 5), min_size=n, max_size=n))
    A = [draw(st.lists(ints, min_size=n, max_size=n)) for _ in range(m)]
    b = draw(st.lists(st.integers(-6, 8), min_size=m, max_size=m))
    senses = draw(st.lists(st.sampled_from(["<=", ">=", "="]), min_size=m, max_size=m))
    ub = draw(st.lists(st.one_of(st.just(np.inf), st.integers(0, 6)), min_size=n, max_size=n))
    return c, A, senses, b, ub


@settings(max_examples=300, deadline=None)
@given(random_lps())
def test_simplex_matches_highs(lp):
    c, A, senses, b, ub = lp
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    res = simplex(c, A, senses, b, ub=ub)
    le = [k for k, s in enumerate(senses) if s == "<="]
    ge = [k for k, s in enumerate(senses) if s == ">="]
    eq = [k for k, s in enumerate(senses) if s == "="]
    A_ub = np.vstack([A[le], -A[ge]]) if le or ge else None
    b_ub = np.concatenate([b[le], -b[ge]]) if le or ge else None
    kw = dict(
        A_ub=A_ub, b_ub=b_ub, A_eq=A[eq] if eq else None, b_eq=b[eq] if eq else None,
        bounds=[(0, None if u == np.inf else u) for u in ub], method="highs",
    )
    ref = linprog(c, **kw)
    expected = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}[ref.status]
    if expected == INFEASIBLE and linprog(np.zeros(len(c)), **kw).status == 0:
        # HiGHS presolve can report "infeasible or unbounded" as infeasible
        expected = UNBOUNDED
    assert res.status == expected
    if expected == OPTIMAL:
        assert res.objective == pytest.approx(ref.fun, abs=1e-7)
        x = res.x
        assert np.all(x >= -1e-9) and np.all(x <= np.array(ub, dtype=float) + 1e-9)
        slack = A @ x - b
        for k, s in enumerate(senses):
            assert {"<=": slack[k] <= 1e-7, ">=": slack[k] >= -1e-7, "=": abs(slack[k]) <= 1e-7}[s]


# -- MILP ---------------------------------------------------------------------

ENGINES = ["bnb", "highs"]


@pytest.mark.parametrize("engine", ENGINES)
@pytest.mark.parametrize(
    "name, method, expected",
    [
        ("ring3", "slp", 3),
        ("k4", "slp", 4),
        ("ring3", "l2", 9),
        ("k4", "l2", 18),
        ("k4", "l3", 20),
        ("ring3", "l3", None),
        ("subdivided_k4", "slp", 5),
    ],
)
def test_known_optima(engine, name, method, expected):
    net, cs, m = model_for(name, method)
    out = solve_milp(m, engine=engine)
    if expected is None:
        assert out.status == INFEASIBLE and out.solution is None
        return
    assert out.status == OPTIMAL
    assert out.objective == expected == out.best_bound
    if engine == "bnb":
        assert out.lp_bound <= expected + 1e-6
    else:
        assert out.lp_bound is None


@pytest.mark.parametrize(
    "name, method, copies",
    [
        ("ring3", "slp", 3),
        ("ring3", "l2", 3),
        ("ring3", "l3", 3),
        ("k4", "slp", 2),
        ("k4", "l2", 3),
        ("k4", "l3", 2),
        ("subdivided_k4", "slp", 2),
        ("subdivided_k4", "l2", 3),
        ("subdivided_k4", "l3", 2),
    ],
)
def test_matches_exhaustive_search(name, method, copies):
    net, cs, m = model_for(name, method)
    want = exhaustive_optimum(net, cs, method, copies)
    out = solve_milp(m, engine="highs" if method == "l3" else "bnb")
    if want is None:
        assert out.status == INFEASIBLE
    else:
        assert out.status == OPTIMAL and out.objective == want


def test_ring3_l1_brute_force():
    # every variable of the three-ring L1 model in 0..3, checked row by row
    from itertools import product

    for K, want in [(0, None), (1, None), (2, 3), (5, 3)]:
        net, cs, m = model_for("ring3", "l1", K=K)
        best = None
        for vals in product(range(4), repeat=m.n_vars):
            if all(row.holds(vals) for row in m.constraints):
                obj = sum(coef * vals[col] for col, coef in m.objective)
                best = obj if best is None else min(best, obj)
        assert best == want
        out = solve_milp(m, engine="bnb")
        assert out.objective == want
        assert out.status == (INFEASIBLE if want is None else OPTIMAL)


@pytest.mark.parametrize("name", ["k4", "five_node", "prism6"])
def test_engines_agree_on_l1_sweep(name):
    net = load(name)
    cs = enumerate_simple_cycles(net)
    for K in (0, 1, 2, 4, 8):
        m = build_model(net, cs, "l1", K=K)
        a, b = solve_milp(m, engine="bnb"), solve_milp(m, engine="highs")
        assert a.status == b.status
        assert a.objective == b.objective
        if a.solution is not None:
            verify_assignment(m, list(a.solution.values.values()))


# L3 on the in-tree engine is only cross-checked on K4 (see test_known_optima):
# its big-M relaxation is as weak as SLP and the search runs for minutes here
@pytest.mark.parametrize("name", ["five_node", "prism6"])
@pytest.mark.parametrize("method", ["slp", "l2"])
def test_engines_agree(name, method):
    _, _, m = model_for(name, method)
    a, b = solve_milp(m, engine="bnb"), solve_milp(m, engine="highs")
    assert (a.status, a.objective) == (b.status, b.objective)


def test_implied_rows_leave_model_alone():
    net, cs, m = model_for("five_node", "l3")
    strong = with_implied_rows(m)
    assert len(strong.constraints) == len(m.constraints) + len(cs)
    assert strong.family_count("implied_sharing") == len(cs)
    assert with_implied_rows(model_for("five_node", "l2")[2]).family_count("implied_sharing") == 0
    # the rows cut off no L3-feasible point: the optimum is unchanged
    out = solve_milp(m, engine="highs")
    verify_assignment(strong, [out.solution.values[v.name] for v in m.variables])


def test_deterministic_outcomes():
    _, _, m = model_for("five_node", "l2")
    a, b = solve_milp(m, engine="bnb"), solve_milp(m, engine="bnb")
    assert a == b
    assert a.nodes_explored == b.nodes_explored
    assert a.incumbents == b.incumbents
    assert list(a.incumbents) == sorted(a.incumbents, reverse=True)


def test_budget_exhausted_reports_bound():
    _, _, m = model_for("k4", "l2")
    out = solve_milp(m, SolveLimits(max_nodes=3), engine="bnb")
    assert out.status == BUDGET_EXHAUSTED
    assert out.best_bound <= 18
    assert out.nodes_explored == 3
    if out.solution is not None:
        assert out.objective >= 18


def test_auto_engine_choice():
    _, _, m = model_for("k4")
    assert solve_milp(m).engine == "bnb"
    _, _, m3 = model_for("k4", "l3")
    assert solve_milp(m3).engine == "highs"


def test_bnb_rejects_negative_costs():
    _, _, m = model_for("ring3")
    col = m.s_col[1]
    bad = type(m)(m.variables, ((col, -1),), m.constraints, m.tags, m.np_col, m.nip_col, m.s_col)
    with pytest.raises(ValueError):
        solve_milp(bad, engine="bnb")


def test_unknown_engine():
    _, _, m = model_for("ring3")
    with pytest.raises(ValueError):
        solve_milp(m, engine="cplex")


@pytest.mark.parametrize("kw", [{"max_nodes": 0}, {"time_budget": 0}, {"integrality_tolerance": 0.1}, {"absolute_gap": -1}])
def test_limits_validation(kw):
    with pytest.raises(ValueError):
        SolveLimits(**kw)
