import numpy as np
import pytest

from persuade.lp import (
    Constraint,
    LinearProgram,
    duality_gap,
    solve_lp,
    solve_with_cuts,
)

from .oracles import vertex_enumeration_optimum


def test_simple_max():
    lp = LinearProgram(1, sense="max", objective=[1.0])
    lp.add_constraint({0: 1.0}, "<=", 3.0)
    sol = solve_lp(lp)
    assert sol.is_optimal
    assert sol.objective == pytest.approx(3.0)
    assert sol.x[0] == pytest.approx(3.0)
    assert sol.duals[0] == pytest.approx(1.0)  # objective moves 1:1 with the rhs


def test_infeasible():
    lp = LinearProgram(1, sense="max", objective=[1.0])
    lp.add_constraint({0: 1.0}, ">=", 1.0)
    lp.add_constraint({0: 1.0}, "<=", 0.0)
    assert solve_lp(lp).status == "infeasible"


def test_unbounded():
    lp = LinearProgram(1, sense="max", objective=[1.0])
    lp.set_bounds(0, 0.0, None)
    assert solve_lp(lp).status == "unbounded"


def test_zero_objective_over_simplex():
    lp = LinearProgram(2, sense="min", objective=[0.0, 0.0])
    lp.add_constraint({0: 1.0, 1: 1.0}, "==", 1.0)
    sol = solve_lp(lp)
    assert sol.is_optimal
    assert sol.objective == pytest.approx(0.0)


def test_duality_gap_certifies_optimum():
    rng = np.random.default_rng(0)
    for _ in range(30):
        nv = int(rng.integers(2, 6))
        lp = LinearProgram(nv, sense="min" if rng.random() < 0.5 else "max")
        lp.set_objective(rng.uniform(-1, 1, size=nv))
        for j in range(nv):
            lp.set_bounds(j, 0.0, 5.0)
        for _ in range(int(rng.integers(1, 8))):
            rel = ("<=", ">=", "==")[int(rng.integers(0, 3))]
            lp.add_constraint(rng.uniform(-1, 1, size=nv), rel, float(rng.uniform(-1, 2)))
        sol = solve_lp(lp)
        if sol.is_optimal:
            assert duality_gap(lp, sol) < 1e-6


@pytest.mark.parametrize("seed", range(60))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(1, 5))
    sense = "max" if rng.random() < 0.5 else "min"
    c = rng.uniform(-1, 1, size=nv)
    rows = []
    for _ in range(int(rng.integers(1, 7))):
        rel = ("<=", ">=")[int(rng.integers(0, 2))]
        rows.append((rng.uniform(-1, 1, size=nv), rel, float(rng.uniform(-0.5, 1.5))))
    bounds = [(0.0, 3.0)] * nv

    lp = LinearProgram(nv, sense=sense, objective=c)
    for j in range(nv):
        lp.set_bounds(j, *bounds[j])
    for coeffs, rel, rhs in rows:
        lp.add_constraint(coeffs, rel, rhs)
    sol = solve_lp(lp)
    oracle = vertex_enumeration_optimum(c, rows, bounds, sense=sense)
    if oracle is None:
        assert sol.status == "infeasible"
    else:
        assert sol.is_optimal
        assert sol.objective == pytest.approx(oracle, abs=1e-6)


class TestCutLoop:
    def test_scalar_covering(self):
        lp = LinearProgram(1, sense="min", objective=[1.0])
        lp.set_bounds(0, None, None)
        lp.add_constraint({0: 1.0}, ">=", 0.0)
        thresholds = [1.0, 5.0, 2.0]

        def oracle(x):
            cuts = []
            for c in thresholds:
                if x[0] < c - 1e-7:
                    cuts.append(Constraint({0: 1.0}, ">=", c))
                    break
            return cuts

        sol, cuts = solve_with_cuts(lp, oracle)
        assert sol.is_optimal
        assert sol.objective == pytest.approx(5.0)
        assert len(cuts) <= 3

    def test_always_feasible_oracle_returns_base_optimum(self):
        lp = LinearProgram(1, sense="min", objective=[1.0])
        lp.set_bounds(0, 2.0, 10.0)
        sol, cuts = solve_with_cuts(lp, lambda x: [])
        assert sol.is_optimal and sol.objective == pytest.approx(2.0)
        assert cuts == []

    def test_round_limit_status(self):
        lp = LinearProgram(1, sense="min", objective=[1.0])
        lp.set_bounds(0, 0.0, None)
        counter = {"k": 0}

        def endless(x):
            counter["k"] += 1
            return [Constraint({0: 1.0}, ">=", x[0] + 1.0)]

        sol, cuts = solve_with_cuts(lp, endless, max_rounds=5)
        assert sol.status == "round-limit"
        assert len(cuts) == 5

    def test_min_relaxations_are_nondecreasing(self):
        lp = LinearProgram(1, sense="min", objective=[1.0])
        lp.set_bounds(0, 0.0, None)
        seen = []
        thresholds = iter([1.0, 2.0, 3.0])

        def oracle(x):
            seen.append(x[0])
            c = next(thresholds, None)
            if c is not None and x[0] < c - 1e-7:
                return [Constraint({0: 1.0}, ">=", c)]
            return []

        sol, _ = solve_with_cuts(lp, oracle)
        assert sol.is_optimal
        assert seen == sorted(seen)


def test_dump_mentions_every_row():
    lp = LinearProgram(2, sense="max", objective=[1.0, 0.5])
    lp.add_constraint({0: 2.0, 1: 1.0}, "<=", 4.0)
    lp.add_constraint({1: 1.0}, ">=", 0.5)
    text = lp.dump()
    assert "max 1 v0 + 0.5 v1" in text
    assert "2 v0 + 1 v1 <= 4" in text
    assert "1 v1 >= 0.5" in text


def test_rejects_bad_rows():
    lp = LinearProgram(2)
    with pytest.raises(ValueError):
        lp.add_constraint({5: 1.0}, "<=", 1.0)
    with pytest.raises(ValueError):
        lp.add_constraint({0: float("nan")}, "<=", 1.0)
    with pytest.raises(ValueError):
        lp.add_constraint({0: 1.0}, "<", 1.0)
