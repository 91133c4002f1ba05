import numpy as np
import pytest

from persuade.errors import CapExceededError
from persuade.exact import solve_cce_exact, solve_persuasive_exact
from persuade.generators import example_degenerate_instance, random_uniform_instance
from persuade.model import PersuasionInstance, verify_scheme
from persuade.profiles import ActionProfile
from persuade.setfuncs import Additive, ExplicitTable

from .oracles import vertex_enumeration_optimum


def one_receiver_instance():
    return PersuasionInstance(
        states=("up", "down"), prior=(0.5, 0.5), payoff=[[1.0, -3.0]],
        objective=Additive((1.0,)),
    )


class TestPersuasiveExact:
    def test_degenerate_instance_reveals_nothing(self):
        inst = example_degenerate_instance(2)
        scheme, value = solve_persuasive_exact(inst)
        assert value == pytest.approx(2.0)
        report, ok = verify_scheme(inst, scheme, "exact")
        assert ok and report.sender_value == pytest.approx(value)

    def test_hand_instance_two_thirds(self):
        scheme, value = solve_persuasive_exact(one_receiver_instance())
        assert value == pytest.approx(2.0 / 3.0)
        # cross-check with vertex enumeration on the same 4-variable LP
        # (vars: prob of recommending 1/0 per state)
        c = [0.5, 0.0, 0.5, 0.0]
        rows = [
            ([0.5, 0.0, -1.5, 0.0], ">=", 0.0),  # obedience of signal {1}
            ([0.0, 0.5, 0.0, -1.5], "<=", 0.0),  # obedience of signal {}
            ([1.0, 1.0, 0.0, 0.0], "==", 1.0),
            ([0.0, 0.0, 1.0, 1.0], "==", 1.0),
        ]
        oracle = vertex_enumeration_optimum(c, rows, [(0.0, 1.0)] * 4, sense="max")
        assert value == pytest.approx(oracle)

    def test_fully_relaxed_eps_hits_unconstrained_best(self):
        inst = random_uniform_instance(4, 2, seed=9, objective_kind="explicit")
        _, value = solve_persuasive_exact(inst, mode="eps", eps=1.0)
        prior = np.asarray(inst.prior)
        best = max(
            sum(
                prior[t] * inst.objective_for(t).value(ActionProfile.from_index(k, 4).bits)
                for t in range(2)
            )
            for k in range(16)
        )
        assert value == pytest.approx(best, abs=1e-7)

    def test_eps_value_nondecreasing(self):
        inst = random_uniform_instance(4, 2, seed=11)
        values = [
            solve_persuasive_exact(inst, mode="eps", eps=e)[1] if e else
            solve_persuasive_exact(inst)[1]
            for e in (0.0, 0.1, 0.3, 0.6)
        ]
        for lo, hi in zip(values, values[1:]):
            assert hi >= lo - 1e-9

    def test_eps_zero_matches_exact(self):
        inst = random_uniform_instance(5, 2, seed=13)
        _, exact = solve_persuasive_exact(inst)
        _, eps0 = solve_persuasive_exact(inst, mode="eps", eps=0.0)
        assert exact == pytest.approx(eps0, abs=1e-9)

    def test_single_state_reduces_to_sign_constrained_max(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            n = int(rng.integers(1, 7))
            payoff = rng.uniform(-1, 1, size=(n, 1))
            f = ExplicitTable(tuple(rng.uniform(0, 1, size=1 << n)))
            inst = PersuasionInstance(
                states=("only",), prior=(1.0,), payoff=payoff, objective=f
            )
            _, value = solve_persuasive_exact(inst)
            best = max(
                f.value(ActionProfile.from_index(k, n).bits)
                for k in range(1 << n)
                if all(
                    (payoff[i, 0] >= 0 if (k >> i) & 1 else payoff[i, 0] <= 0)
                    for i in range(n)
                )
            )
            assert value == pytest.approx(best, abs=1e-7)

    def test_cap(self):
        inst = random_uniform_instance(3, 2, seed=0)
        big = PersuasionInstance(
            states=inst.states,
            prior=inst.prior,
            payoff=np.zeros((13, 2)),
            objective=Additive((0.0,) * 13),
        )
        with pytest.raises(CapExceededError):
            solve_persuasive_exact(big)

    @pytest.mark.parametrize("seed", range(10))
    def test_emitted_scheme_reverifies(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_uniform_instance(
            int(rng.integers(1, 7)), int(rng.integers(1, 4)), seed=seed,
            objective_kind="explicit",
        )
        scheme, value = solve_persuasive_exact(inst)
        report, ok = verify_scheme(inst, scheme, "exact")
        assert ok
        assert report.sender_value == pytest.approx(value, abs=1e-7)


class TestCceExact:
    def test_single_receiver_matches_persuasive(self):
        inst = one_receiver_instance()
        _, value = solve_cce_exact(inst)
        assert value == pytest.approx(2.0 / 3.0)

    def test_prior_agreeable_receivers_and_monotone_objective(self):
        rng = np.random.default_rng(23)
        n = 4
        payoff = rng.uniform(0.1, 1.0, size=(n, 2))  # positive in every state
        inst = PersuasionInstance(
            states=("a", "b"), prior=(0.4, 0.6), payoff=payoff,
            objective=Additive(tuple(rng.uniform(0, 1, size=n))),
        )
        _, value = solve_cce_exact(inst)
        full = inst.objective_for(0).value((1,) * n)
        assert value == pytest.approx(full, abs=1e-7)

    def test_reduction_style_half_value(self):
        # one upper-bounded receiver with target 1/2 and cardinality payout
        inst = PersuasionInstance(
            states=("silent", "live"), prior=(0.5, 0.5), payoff=[[0.5, -1.0]],
            objective=(Additive((0.0,)), Additive((1.0,))),
        )
        _, value = solve_cce_exact(
            inst, pin_state_signal=(0, ActionProfile((1,)))
        )
        assert value == pytest.approx(0.25)

    @pytest.mark.parametrize("seed", range(12))
    def test_cce_value_dominates_persuasive(self, seed):
        rng = np.random.default_rng(40 + seed)
        inst = random_uniform_instance(
            int(rng.integers(1, 7)), int(rng.integers(1, 4)), seed=seed,
            objective_kind="explicit",
        )
        _, persuasive = solve_persuasive_exact(inst)
        scheme, cce = solve_cce_exact(inst)
        assert cce >= persuasive - 1e-9
        _, ok = verify_scheme(inst, scheme, "cce")
        assert ok
