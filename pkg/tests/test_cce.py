import math

import numpy as np
import pytest

from persuade.cce import (
    ReductionSpec,
    build_reduction_instance,
    crossvalidate_equivalence,
    solve_cce_cutting,
    solve_wm_primal_bruteforce,
    wm_dual_alpha_nonpositive,
)
from persuade.errors import UnsupportedObjectiveError, ValidationError
from persuade.exact import solve_cce_exact, solve_persuasive_exact
from persuade.generators import random_reduction_spec, random_uniform_instance
from persuade.model import PersuasionInstance, verify_scheme
from persuade.setfuncs import Additive, CutFunction, ExplicitTable


class TestSolveCceCutting:
    @pytest.mark.parametrize("seed", range(15))
    def test_matches_exact(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_uniform_instance(
            int(rng.integers(1, 8)), int(rng.integers(1, 4)), seed=seed,
            objective_kind="explicit", per_state=bool(seed % 2),
        )
        _, exact = solve_cce_exact(inst)
        scheme, value = solve_cce_cutting(inst)
        assert value == pytest.approx(exact, abs=1e-6)
        _, ok = verify_scheme(inst, scheme, "cce")
        assert ok

    def test_large_additive_instances_certify(self):
        rng = np.random.default_rng(99)
        for trial in range(3):
            n, d = 50, 5
            payoff = rng.uniform(-1, 1, size=(n, d))
            prior = rng.dirichlet(np.ones(d))
            objs = tuple(Additive(tuple(rng.uniform(0, 1, size=n))) for _ in range(d))
            inst = PersuasionInstance(
                states=tuple(f"s{t}" for t in range(d)), prior=tuple(prior),
                payoff=payoff, objective=objs,
            )
            scheme, value = solve_cce_cutting(inst)  # gap check is internal
            _, ok = verify_scheme(inst, scheme, "cce")
            assert ok

    def test_zero_objective_gives_zero_value(self):
        inst = PersuasionInstance(
            states=("a", "b"), prior=(0.5, 0.5),
            payoff=np.random.default_rng(0).uniform(-1, 1, size=(4, 2)),
            objective=Additive((0.0,) * 4),
        )
        scheme, value = solve_cce_cutting(inst)
        assert value == pytest.approx(0.0, abs=1e-9)
        _, ok = verify_scheme(inst, scheme, "cce")
        assert ok

    def test_unsupported_objective_kind(self):
        inst = PersuasionInstance(
            states=("a", "b"), prior=(0.5, 0.5), payoff=[[0.5, -0.5], [0.2, 0.1]],
            objective=CutFunction(2, ((0, 1, 1.0),)),
        )
        with pytest.raises(UnsupportedObjectiveError):
            solve_cce_cutting(inst)

    def test_beats_prior_optimal_baseline(self):
        rng = np.random.default_rng(5)
        for seed in range(5):
            inst = random_uniform_instance(5, 2, seed=seed, objective_kind="additive")
            _, value = solve_cce_cutting(inst)
            prior = np.asarray(inst.prior)
            baseline_profile = tuple(
                1 if float(inst.payoff[i, :] @ prior) >= 0 else 0 for i in range(5)
            )
            baseline = sum(
                prior[t] * inst.objective_for(t).value(baseline_profile)
                for t in range(2)
            )
            assert value >= baseline - 1e-7


class TestReductionSpec:
    def test_partition_enforced(self):
        with pytest.raises(ValidationError):
            ReductionSpec(Additive((1.0, 1.0)), (0.5, 0.5), frozenset({0}), frozenset())

    def test_beta_clamped(self):
        spec = ReductionSpec(Additive((1.0,)), (1.5,), frozenset({0}), frozenset())
        assert spec.beta == (1.0,)


class TestBuildReductionInstance:
    def test_upper_branch_payoffs(self):
        spec = ReductionSpec(Additive((1.0,)), (0.5,), frozenset({0}), frozenset())
        inst = build_reduction_instance(spec)
        assert inst.payoff.tolist() == [[0.5, -1.0]]
        assert inst.prior.tolist() == [0.5, 0.5]

    def test_lower_branch_payoffs(self):
        spec = ReductionSpec(Additive((1.0,)), (1.0,), frozenset(), frozenset({0}))
        inst = build_reduction_instance(spec)
        assert inst.payoff.tolist() == [[0.0, 1.0]]

    def test_boundary_beta(self):
        n = 3
        spec = ReductionSpec(
            Additive((1.0,) * n), (0.0,) * n, frozenset(range(n)), frozenset()
        )
        inst = build_reduction_instance(spec)
        assert inst.payoff.tolist() == [[0.0, -1.0]] * n

    def test_first_state_objective_vanishes(self):
        spec = random_reduction_spec(4, seed=3)
        inst = build_reduction_instance(spec)
        assert inst.objective_for(0).value((1, 1, 1, 1)) == 0.0
        assert inst.objective_for(1) is spec.objective


class TestWmPrimal:
    def test_single_receiver_half(self):
        spec = ReductionSpec(Additive((1.0,)), (0.5,), frozenset({0}), frozenset())
        dist, value = solve_wm_primal_bruteforce(spec)
        assert value == pytest.approx(0.5)
        assert dist[1] == pytest.approx(0.5)

    def test_unconstrained_monotone_takes_everything(self):
        n = 4
        spec = ReductionSpec(
            Additive((1.0,) * n), (1.0,) * n, frozenset(range(n)), frozenset()
        )
        _, value = solve_wm_primal_bruteforce(spec)
        assert value == pytest.approx(float(n))

    def test_forced_full_set(self):
        n = 3
        spec = ReductionSpec(
            Additive((1.0, 2.0, 3.0)), (1.0,) * n, frozenset(), frozenset(range(n))
        )
        dist, value = solve_wm_primal_bruteforce(spec)
        assert value == pytest.approx(6.0)
        assert dist[(1 << n) - 1] == pytest.approx(1.0)


class TestWmDualClosedForm:
    def test_negative_alpha_unbounded(self):
        assert wm_dual_alpha_nonpositive((1.0,), -1.0, {0}, set()) == -math.inf

    def test_sign_incompatible_beta_unbounded(self):
        assert wm_dual_alpha_nonpositive((-1.0,), 0.0, {0}, set()) == -math.inf
        assert wm_dual_alpha_nonpositive((1.0,), 0.0, set(), {0}) == -math.inf

    def test_compatible_signs_give_zero(self):
        assert wm_dual_alpha_nonpositive((0.5, -0.25), 0.0, {0}, {1}) == 0.0

    def test_positive_alpha_rejected(self):
        with pytest.raises(ValueError):
            wm_dual_alpha_nonpositive((0.5,), 1.0, {0}, set())


class TestCrossvalidation:
    def test_hand_spec(self):
        spec = ReductionSpec(Additive((1.0,)), (0.5,), frozenset({0}), frozenset())
        report = crossvalidate_equivalence(spec)
        assert report.ok
        assert report.cce_value == pytest.approx(0.25)
        assert report.wm_value == pytest.approx(0.5)

    def test_zero_objective(self):
        spec = ReductionSpec(
            Additive((0.0, 0.0)), (0.3, 0.8), frozenset({0}), frozenset({1})
        )
        report = crossvalidate_equivalence(spec)
        assert report.ok
        assert report.cce_value == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("seed", range(15))
    def test_random_specs(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        spec = random_reduction_spec(n, seed=seed)
        report = crossvalidate_equivalence(spec)
        assert report.ok, report.message
        assert report.marginal_feasible


class TestRelaxationOrdering:
    @pytest.mark.parametrize("seed", range(8))
    def test_cce_dominates_persuasive(self, seed):
        inst = random_uniform_instance(
            int(np.random.default_rng(seed).integers(1, 7)), 2, seed=seed,
            objective_kind="explicit",
        )
        _, persuasive = solve_persuasive_exact(inst)
        _, cce = solve_cce_exact(inst)
        assert cce >= persuasive - 1e-9
