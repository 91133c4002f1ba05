import math

import numpy as np
import pytest

from persuade.arrangement import (
    Hyperplane,
    cell_has_interior,
    check_nondegeneracy,
    enumerate_cells,
    fpt_label_bound,
    simplex_constraints,
    solve_fpt,
)
from persuade.errors import CapExceededError, DegenerateInstanceError
from persuade.exact import solve_persuasive_exact
from persuade.generators import (
    example_degenerate_instance,
    random_general_position_arrangement,
    random_uniform_instance,
)
from persuade.model import verify_scheme

from .oracles import sampled_sign_vectors


class TestCellHasInterior:
    def test_half_line(self):
        w = cell_has_interior([Hyperplane((1.0,), 0.0)], [1])
        assert w is not None and w[0] > 0

    def test_duplicate_plane_opposite_sides_is_empty(self):
        planes = [Hyperplane((1.0,), 0.0), Hyperplane((1.0,), 0.0)]
        assert cell_has_interior(planes, [1, 0]) is None

    def test_bounded_middle_cell_of_three_lines(self):
        # x >= 0.1, y >= 0.1, x + y <= 0.8 encloses a triangle
        planes = [
            Hyperplane((1.0, 0.0), 0.1),
            Hyperplane((0.0, 1.0), 0.1),
            Hyperplane((1.0, 1.0), 0.8),
        ]
        w = cell_has_interior(planes, [1, 1, 0])
        assert w is not None
        assert w[0] > 0.1 and w[1] > 0.1 and w.sum() < 0.8
        # the witness is sampled-consistent: nearby points share its label
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = w + rng.normal(scale=1e-4, size=2)
            assert p[0] > 0.1 and p[1] > 0.1 and p.sum() < 0.8


class TestEnumerateCells:
    def test_single_plane_splits_plane(self):
        cells = enumerate_cells([Hyperplane((1.0, 0.0), 0.0)])
        assert sorted(c.label for c in cells) == [(0,), (1,)]

    def test_three_general_lines_make_seven_cells(self):
        planes = random_general_position_arrangement(3, 2, seed=1)
        assert len(enumerate_cells(planes)) == 7

    def test_four_general_lines_make_eleven(self):
        planes = random_general_position_arrangement(4, 2, seed=2)
        assert len(enumerate_cells(planes)) == 11

    def test_two_parallel_lines_among_four_lose_one_cell(self):
        planes = [
            Hyperplane((1.0, 0.0), -0.3),
            Hyperplane((1.0, 0.0), 0.4),  # parallel to the first
            Hyperplane((0.0, 1.0), 0.0),
            Hyperplane((1.0, 1.0), 0.2),
        ]
        assert len(enumerate_cells(planes)) == 10

    def test_labels_are_distinct_and_certified(self):
        planes = random_general_position_arrangement(5, 2, seed=3)
        cells = enumerate_cells(planes)
        labels = [c.label for c in cells]
        assert len(set(labels)) == len(labels)
        for cell in cells:
            assert cell_has_interior(planes, cell.label, box_radius=None) is not None

    def test_count_bound_and_sampling_cover(self):
        for seed in range(8):
            m, d = 6, 2
            planes = random_general_position_arrangement(m, d, seed=seed)
            cells = enumerate_cells(planes)
            bound = sum(math.comb(m, i) for i in range(d + 1))
            assert len(cells) == bound
            sampled = sampled_sign_vectors(planes, box_radius=8.0, count=20_000, seed=seed)
            assert sampled <= {c.label for c in cells}

    def test_duplicate_planes_collapse_to_same_bits(self):
        h = Hyperplane((1.0, 0.5), 0.2)
        dup = Hyperplane((2.0, 1.0), 0.4)  # same plane, positive scaling
        other = Hyperplane((0.0, 1.0), 0.0)
        cells = enumerate_cells([h, dup, other])
        assert len(cells) == 4
        for c in cells:
            assert c.label[0] == c.label[1]

    def test_cap_enforced(self):
        planes = random_general_position_arrangement(6, 2, seed=5)
        with pytest.raises(CapExceededError):
            enumerate_cells(planes, cap=5)

    def test_simplex_restriction(self):
        # central planes restricted to the belief simplex in 2d
        planes = [Hyperplane((1.0, -1.0), 0.0)]
        cells = enumerate_cells(planes, extra=simplex_constraints(2), box_radius=None)
        assert sorted(c.label for c in cells) == [(0,), (1,)]
        for c in cells:
            assert c.witness.sum() == pytest.approx(1.0, abs=1e-7)
            assert c.witness.min() >= -1e-9


class TestNondegeneracy:
    def test_identical_payoffs_flagged(self):
        inst = example_degenerate_instance(2)
        assert check_nondegeneracy(inst) == (0, 1)

    def test_identity_payoffs_pass(self):
        from persuade.model import PersuasionInstance
        from persuade.setfuncs import Additive

        inst = PersuasionInstance(
            states=("a", "b"), prior=(0.5, 0.5), payoff=[[1.0, 0.0], [0.0, 1.0]],
            objective=Additive((1.0, 1.0)),
        )
        assert check_nondegeneracy(inst) is None

    def test_random_payoffs_almost_surely_pass(self):
        for seed in range(10):
            inst = random_uniform_instance(6, 2, seed=seed)
            assert check_nondegeneracy(inst) is None


class TestSolveFpt:
    def test_rejects_degenerate(self):
        with pytest.raises(DegenerateInstanceError):
            solve_fpt(example_degenerate_instance(3))

    def test_label_bound_formula(self):
        assert fpt_label_bound(6, 2) == 1 + 6 + 15

    def test_cap(self):
        inst = random_uniform_instance(6, 2, seed=1)
        with pytest.raises(CapExceededError):
            solve_fpt(inst, label_cap=3)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_exact_solver(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 8))
        d = int(rng.integers(1, 4))
        inst = random_uniform_instance(
            n, d, seed=seed, objective_kind="explicit", nondegenerate=True
        )
        scheme, value = solve_fpt(inst)
        _, exact = solve_persuasive_exact(inst)
        assert value == pytest.approx(exact, abs=1e-6)
        _, ok = verify_scheme(inst, scheme, "exact")
        assert ok

    def test_candidate_labels_cover_an_optimal_support(self):
        for seed in range(6):
            inst = random_uniform_instance(
                5, 2, seed=100 + seed, objective_kind="explicit", nondegenerate=True
            )
            fpt_scheme, value = solve_fpt(inst)
            exact_scheme, exact = solve_persuasive_exact(inst)
            assert value == pytest.approx(exact, abs=1e-6)
            # the fpt signal set supports an optimal solution: re-solving the
            # exact LP restricted to the fpt scheme's own support loses nothing
            from persuade.exact import solve_restricted_persuasive

            _, restricted = solve_restricted_persuasive(
                inst, list(fpt_scheme.signals)
            )
            assert restricted == pytest.approx(exact, abs=1e-6)
