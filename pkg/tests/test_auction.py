import numpy as np
import pytest

from persuade.auction import (
    AuctionInstance,
    AuctionType,
    brute_force_auction,
    comparison_hyperplanes,
    enumerate_outcomes,
    full_information_revenue,
    solve_auction,
)
from persuade.errors import CapExceededError, ValidationError
from persuade.generators import random_auction_instance


def hand_instance():
    return AuctionInstance(
        states=("a", "b"), prior=(0.5, 0.5),
        types=(AuctionType(1.0, [[1.0, 0.0], [0.0, 1.0]]),),
    )


class TestComparisonHyperplanes:
    def test_two_bidders_single_type(self):
        comps = comparison_hyperplanes(hand_instance())
        assert len(comps) == 1
        assert not comps[0].degenerate

    def test_count_formula(self):
        inst = random_auction_instance(3, 2, 2, seed=0)
        assert len(comparison_hyperplanes(inst)) == 3 * 2 // 2 * 2

    def test_identical_rows_flagged(self):
        inst = AuctionInstance(
            states=("a", "b"), prior=(0.5, 0.5),
            types=(AuctionType(1.0, [[1.0, 0.0], [1.0, 0.0]]),),
        )
        comps = comparison_hyperplanes(inst)
        assert comps[0].degenerate and comps[0].plane is None
        with pytest.raises(ValidationError):
            enumerate_outcomes(inst)


class TestEnumerateOutcomes:
    def test_single_state_has_one_outcome(self):
        inst = AuctionInstance(
            states=("x",), prior=(1.0,),
            types=(AuctionType(1.0, [[3.0], [1.0], [2.0]]),),
        )
        outs = enumerate_outcomes(inst)
        assert len(outs) == 1
        assert outs[0][0].rankings == ((0, 2, 1),)

    def test_hand_instance_splits_at_half(self):
        outs = enumerate_outcomes(hand_instance())
        rankings = {o.rankings for o, _ in outs}
        assert rankings == {((0, 1),), ((1, 0),)}
        for o, witness in outs:
            expected = hand_instance().types[0].values @ witness
            order = sorted(range(2), key=lambda i: (-expected[i], i))
            assert tuple(order) == o.rankings[0]

    def test_count_respects_region_bound(self):
        for seed in range(6):
            inst = random_auction_instance(3, 2, 2, seed=seed)
            outs = enumerate_outcomes(inst)
            m = 3 * 2 // 2 * 2
            bound = 1 + m + m * (m - 1) // 2  # cells of m planes in the plane
            assert 1 <= len(outs) <= bound


class TestSolveAuction:
    def test_single_state_second_price(self):
        inst = AuctionInstance(
            states=("x",), prior=(1.0,),
            types=(AuctionType(1.0, [[3.0], [1.0]]),),
        )
        _, revenue = solve_auction(inst)
        assert revenue == pytest.approx(1.0)

    def test_hand_instance_gets_half(self):
        _, revenue = solve_auction(hand_instance())
        assert revenue == pytest.approx(0.5)
        assert full_information_revenue(hand_instance()) == pytest.approx(0.0)

    def test_dominates_both_baselines(self):
        for seed in range(10):
            inst = random_auction_instance(3, 2, 1, seed=seed)
            scheme, revenue = solve_auction(inst)
            assert revenue >= full_information_revenue(inst) - 1e-9
            # no information: rank by prior expected values
            expected = inst.types[0].values @ inst.prior
            second = float(np.sort(expected)[-2])
            assert revenue >= second - 1e-9

    def test_consistency_slack_of_emitted_outcomes(self):
        inst = random_auction_instance(3, 2, 2, seed=4)
        scheme, _ = solve_auction(inst)
        for k, outcome in enumerate(scheme.outcomes):
            weights = inst.prior * scheme.probs[:, k]
            if weights.sum() < 1e-12:
                continue
            for t_idx, tp in enumerate(inst.types):
                expected = tp.values @ weights
                ranking = outcome.rankings[t_idx]
                for hi, lo in zip(ranking, ranking[1:]):
                    assert expected[hi] >= expected[lo] - 1e-7

    def test_literal_objective_drops_type_weights(self):
        inst = random_auction_instance(2, 2, 2, seed=8)
        _, weighted = solve_auction(inst)
        _, literal = solve_auction(inst, literal_objective=True)
        # literal counts each type fully, so it can only be larger here
        assert literal >= weighted - 1e-9


class TestBruteForce:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_solver(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 4))
        num_types = int(rng.integers(1, 3))
        inst = random_auction_instance(n, 2, num_types, seed=seed)
        _, fast = solve_auction(inst)
        slow = brute_force_auction(inst)
        assert fast == pytest.approx(slow, abs=1e-6)

    def test_single_state_equals_deterministic_revenue(self):
        inst = AuctionInstance(
            states=("x",), prior=(1.0,),
            types=(AuctionType(0.5, [[3.0], [1.0]]), AuctionType(0.5, [[2.0], [5.0]])),
        )
        assert brute_force_auction(inst) == pytest.approx(0.5 * 1.0 + 0.5 * 2.0)

    def test_cap(self):
        inst = random_auction_instance(4, 2, 3, seed=0)  # (4!)^3 candidates
        with pytest.raises(CapExceededError):
            brute_force_auction(inst)
