"""LP engine contract: certified optima, statuses, structural invariants."""

import math

import numpy as np
import pytest

from energycoop.lp import LpProblem, LpStatus, lp_solve

from oracles import enumerate_lp_optimum


def make_problem(c, eq=(), ub=(), bounds=()):
    return LpProblem(objective=tuple(c),
                     eq_constraints=tuple((tuple(r), b) for r, b in eq),
                     ub_constraints=tuple((tuple(r), b) for r, b in ub),
                     bounds=tuple(bounds))


def random_program(rng):
    n = int(rng.integers(2, 7))
    lo = rng.uniform(-2, 0, n)
    hi = rng.uniform(0.5, 3, n)
    c = rng.normal(size=n)
    eq = [(rng.normal(size=n), rng.normal())
          for _ in range(int(rng.integers(0, min(2, n))))]
    ub = [(rng.normal(size=n), rng.normal())
          for _ in range(int(rng.integers(0, 4)))]
    return c, eq, ub, list(zip(lo, hi))


def test_min_nonneg_var():
    sol = lp_solve(make_problem([1.0]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(0.0, abs=1e-12)
    assert sol.objective_value == pytest.approx(0.0, abs=1e-12)


def test_max_bounded_var():
    sol = lp_solve(make_problem([-1.0], bounds=[(0.0, 3.0)]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(3.0)
    assert sol.objective_value == pytest.approx(-3.0)


def test_unbounded():
    sol = lp_solve(make_problem([-1.0]))
    assert sol.status is LpStatus.UNBOUNDED


def test_infeasible():
    sol = lp_solve(make_problem([1.0], eq=[(np.array([1.0]), -2.0)]))
    assert sol.status is LpStatus.INFEASIBLE


def test_validation():
    with pytest.raises(ValueError):
        make_problem([1.0, 1.0], eq=[(np.array([1.0]), 0.0)])
    with pytest.raises(ValueError):
        make_problem([1.0], bounds=[(2.0, 1.0)])


def test_vertex_oracle_agreement_smoke():
    # the full 200-program run is acceptance criterion 11
    rng = np.random.default_rng(42)
    for _ in range(40):
        c, eq, ub, bounds = random_program(rng)
        sol = lp_solve(make_problem(c, eq, ub, bounds))
        status, value = enumerate_lp_optimum(c, eq, ub, bounds)
        if status == "Infeasible":
            assert sol.status is LpStatus.INFEASIBLE
        else:
            assert sol.status is LpStatus.OPTIMAL
            assert sol.objective_value == pytest.approx(value, abs=1e-7)


def test_optimal_point_certified_feasible():
    rng = np.random.default_rng(7)
    for _ in range(50):
        c, eq, ub, bounds = random_program(rng)
        sol = lp_solve(make_problem(c, eq, ub, bounds))
        if sol.status is not LpStatus.OPTIMAL:
            continue
        x = np.asarray(sol.x)
        for row, b in eq:
            assert abs(np.dot(row, x) - b) <= 1e-9
        for row, b in ub:
            assert np.dot(row, x) - b <= 1e-9
        for j, (lo, hi) in enumerate(bounds):
            assert lo - 1e-9 <= x[j] <= hi + 1e-9


def test_row_permutation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(25):
        c, eq, ub, bounds = random_program(rng)
        base = lp_solve(make_problem(c, eq, ub, bounds))
        perm = lp_solve(make_problem(c, eq[::-1], ub[::-1], bounds))
        assert base.status == perm.status
        if base.status is LpStatus.OPTIMAL:
            assert abs(base.objective_value - perm.objective_value) <= 1e-9


def test_redundant_row_invariance():
    rng = np.random.default_rng(13)
    count = 0
    while count < 25:
        c, eq, ub, bounds = random_program(rng)
        if not ub:
            continue
        base = lp_solve(make_problem(c, eq, ub, bounds))
        dup = lp_solve(make_problem(c, eq, ub + [ub[0]], bounds))
        assert base.status == dup.status
        if base.status is LpStatus.OPTIMAL:
            assert abs(base.objective_value - dup.objective_value) <= 1e-9
        count += 1


def test_determinism():
    rng = np.random.default_rng(3)
    c, eq, ub, bounds = random_program(rng)
    a = lp_solve(make_problem(c, eq, ub, bounds))
    b = lp_solve(make_problem(c, eq, ub, bounds))
    assert a == b


def test_dump_format():
    prob = make_problem([1.0, 2.0],
                        eq=[(np.array([1.0, 1.0]), 3.0)],
                        ub=[(np.array([0.0, 1.0]), 1.5)],
                        bounds=[(0.0, math.inf), (0.0, 2.0)])
    prob = LpProblem(objective=prob.objective,
                     eq_constraints=prob.eq_constraints,
                     ub_constraints=prob.ub_constraints,
                     bounds=prob.bounds,
                     eq_labels=("sum",), ub_labels=("cap",))
    text = prob.dump().splitlines()
    assert text[0] == "sum: 1.0 1.0 (=) 3.0"
    assert text[1] == "cap: 0.0 1.0 (<=) 1.5"
