"""Revenue-optimal public signaling in second-price auctions.

Bidder values depend on an uncertain state and a private value type; a
posterior over states induces, per type, a ranking of bidders by expected
value.  Pairwise comparison hyperplanes over the belief simplex carve it
into regions of constant ranking ("outcomes"); the signaling LP then picks
per-state probabilities over outcomes, constrained so each emitted
outcome's aggregate posterior actually supports its ranking, and collects
the second-ranked bidder's expected value as revenue.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arrangement import Hyperplane, enumerate_cells, simplex_constraints
from .errors import CapExceededError, SolverError, ValidationError
from .lp import LinearProgram, solve_lp

logger = logging.getLogger(__name__)

PROB_SUM_TOL = 1e-9
BRUTE_FORCE_CAP = 720  # (n!)^{num types}
DEGENERATE_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class AuctionType:
    """One value matrix with its probability; values[i, t] >= 0."""

    q: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.array(self.values, dtype=float))
        if self.values.min() < 0:
            raise ValidationError("bidder values must be non-negative")


@dataclass(frozen=True, eq=False)
class AuctionInstance:
    states: tuple[str, ...]
    prior: np.ndarray
    types: tuple[AuctionType, ...]

    def __post_init__(self):
        prior = np.array(self.prior, dtype=float)
        if abs(prior.sum() - 1.0) > PROB_SUM_TOL or prior.min() < 0:
            raise ValidationError("prior must be a probability vector")
        q = np.array([t.q for t in self.types])
        if abs(q.sum() - 1.0) > PROB_SUM_TOL or q.min() < 0:
            raise ValidationError("type probabilities must form a distribution")
        shapes = {t.values.shape for t in self.types}
        if len(shapes) != 1 or next(iter(shapes))[1] != len(self.states):
            raise ValidationError("value matrices must share shape n x |states|")
        object.__setattr__(self, "prior", prior)

    @property
    def n(self) -> int:
        return self.types[0].values.shape[0]

    @property
    def num_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class ComparisonHyperplane:
    """Expected values of two bidders tie on this plane (for one type)."""

    bidder_i: int
    bidder_j: int
    type_idx: int
    plane: Hyperplane | None  # None when the value rows are identical
    degenerate: bool


@dataclass(frozen=True)
class Outcome:
    """Per type, bidders ordered best-to-worst by expected value."""

    rankings: tuple[tuple[int, ...], ...]

    def second(self, type_idx: int) -> int:
        return self.rankings[type_idx][1]


@dataclass(frozen=True, eq=False)
class AuctionScheme:
    outcomes: tuple[Outcome, ...]
    probs: np.ndarray  # (num_states, num_outcomes)


def comparison_hyperplanes(inst: AuctionInstance) -> list[ComparisonHyperplane]:
    """One plane per bidder pair and type; identical rows are flagged."""
    out = []
    for t_idx, tp in enumerate(inst.types):
        for i in range(inst.n):
            for j in range(i + 1, inst.n):
                normal = tp.values[i, :] - tp.values[j, :]
                if np.linalg.norm(normal) <= DEGENERATE_NORM:
                    out.append(ComparisonHyperplane(i, j, t_idx, None, True))
                else:
                    out.append(
                        ComparisonHyperplane(
                            i, j, t_idx, Hyperplane(tuple(normal), 0.0), False
                        )
                    )
    return out


def _ranking_at(inst: AuctionInstance, posterior: np.ndarray, type_idx: int) -> tuple[int, ...]:
    expected = inst.types[type_idx].values @ posterior
    return tuple(sorted(range(inst.n), key=lambda i: (-expected[i], i)))


def enumerate_outcomes(
    inst: AuctionInstance, cap: int = 100_000
) -> list[tuple[Outcome, np.ndarray]]:
    """Distinct outcomes realizable by some posterior, with witnesses.

    Enumerates the cells the comparison hyperplanes cut the belief simplex
    into and reads rankings off each cell's interior witness (strict
    margins there, so rankings are tie-free).
    """
    comps = comparison_hyperplanes(inst)
    bad = [c for c in comps if c.degenerate]
    if bad:
        c = bad[0]
        raise ValidationError(
            f"bidders {c.bidder_i} and {c.bidder_j} have identical value rows for "
            f"type {c.type_idx}; perturb the values to break the tie"
        )
    planes = [c.plane for c in comps]
    d = inst.num_states
    cells = enumerate_cells(
        planes, box_radius=None, extra=simplex_constraints(d), cap=cap
    )

    seen: dict[Outcome, np.ndarray] = {}
    for cell in cells:
        outcome = Outcome(
            tuple(_ranking_at(inst, cell.witness, t) for t in range(len(inst.types)))
        )
        seen.setdefault(outcome, cell.witness)
    return [(o, w) for o, w in seen.items()]


def _signaling_lp(
    inst: AuctionInstance,
    outcomes: Sequence[Outcome],
    literal_objective: bool,
) -> tuple[np.ndarray, float]:
    """Revenue LP over per-state outcome probabilities.

    Ordering-consistency rows force each emitted outcome's aggregate
    posterior to actually rank bidders as the outcome claims.  The revenue
    objective weights value types by their probabilities; the literal
    variant drops that weighting for comparison (see the CLI flag).
    """
    d, n = inst.num_states, inst.n
    prior = inst.prior
    K = len(outcomes)

    lp = LinearProgram(d * K, sense="max")

    def var(t: int, k: int) -> int:
        return t * K + k

    obj = np.zeros(d * K)
    for k, o in enumerate(outcomes):
        for t_idx, tp in enumerate(inst.types):
            weight = 1.0 if literal_objective else tp.q
            runner_up = o.second(t_idx)
            for s in range(d):
                obj[var(s, k)] += weight * prior[s] * tp.values[runner_up, s]
    lp.set_objective(obj)

    for k, o in enumerate(outcomes):
        for t_idx, tp in enumerate(inst.types):
            ranking = o.rankings[t_idx]
            for pos in range(n - 1):
                hi, lo = ranking[pos], ranking[pos + 1]
                coeffs = {
                    var(s, k): prior[s] * (tp.values[hi, s] - tp.values[lo, s])
                    for s in range(d)
                }
                lp.add_constraint(coeffs, ">=", 0.0, tag=("order", k, t_idx, pos))
    for s in range(d):
        lp.add_constraint({var(s, k): 1.0 for k in range(K)}, "==", 1.0, tag=("norm", s))

    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"auction LP ended with status {sol.status}")
    return sol.x.reshape(d, K), float(sol.objective)


def solve_auction(
    inst: AuctionInstance, literal_objective: bool = False
) -> tuple[AuctionScheme, float]:
    """Optimal public signaling revenue over the realizable outcomes."""
    outcomes = [o for o, _ in enumerate_outcomes(inst)]
    phi, revenue = _signaling_lp(inst, outcomes, literal_objective)
    return AuctionScheme(tuple(outcomes), phi), revenue


def brute_force_auction(
    inst: AuctionInstance, literal_objective: bool = False
) -> float:
    """Same LP over every candidate outcome (all ranking combinations).

    Candidates that no posterior supports are forced to zero probability by
    the consistency rows, so this matches solve_auction; it exists as the
    independent oracle.
    """
    perms = list(itertools.permutations(range(inst.n)))
    count = len(perms) ** len(inst.types)
    if count > BRUTE_FORCE_CAP:
        raise CapExceededError(
            f"{count} candidate outcomes exceed the brute-force cap {BRUTE_FORCE_CAP}"
        )
    outcomes = [
        Outcome(tuple(combo))
        for combo in itertools.product(perms, repeat=len(inst.types))
    ]
    _, revenue = _signaling_lp(inst, outcomes, literal_objective)
    return revenue


def full_information_revenue(inst: AuctionInstance) -> float:
    """Revenue of revealing the state outright (a feasible baseline)."""
    total = 0.0
    for s in range(inst.num_states):
        for tp in inst.types:
            total += inst.prior[s] * tp.q * float(np.sort(tp.values[:, s])[-2])
    return total
