"""Bi-criteria approximately-optimal, approximately-persuasive schemes.

The solver searches over posteriors on a uniform grid of the belief
simplex: each grid point is classified into receivers who strictly prefer
action 1 (threshold +eps), strictly prefer action 0 (-eps), and the
indifferent middle band, whose actions a completion subroutine chooses.
A final LP mixes grid posteriors so they average to the prior, maximizing
the sender's value; Bayes inversion turns the mixture weights into a
scheme whose posterior at each emitted signal is exactly its grid point.

Requires a shared (state-independent) objective and a strictly positive
prior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, SolverError, UnsupportedObjectiveError, ValidationError
from .lp import LinearProgram, solve_lp
from .model import PersuasionInstance, PublicScheme
from .profiles import ActionProfile
from .setfuncs import SetFunction, alpha_subroutine

logger = logging.getLogger(__name__)

DEFAULT_GRID_CAP = 1_000_000
CLASSIFY_TOL = 1e-9
WEIGHT_PRUNE = 1e-10


@dataclass(frozen=True)
class KUniformGrid:
    """All simplex points whose entries are multiples of 1/resolution."""

    resolution: int
    numerators: tuple[tuple[int, ...], ...]

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.numerators, dtype=float) / self.resolution

    def __len__(self) -> int:
        return len(self.numerators)


@dataclass(frozen=True)
class GridProfile:
    """A grid posterior with its receiver classification and chosen profile."""

    numerator: tuple[int, ...]
    point: tuple[float, ...]
    action1: tuple[int, ...]  # strict preference for 1 at this posterior
    action0: tuple[int, ...]  # strict preference for 0
    free: tuple[int, ...]  # inside the +-eps indifference band
    profile: ActionProfile
    value: float


def grid_size(num_states: int, resolution: int) -> int:
    return math.comb(resolution + num_states - 1, num_states - 1)


def grid_resolution(eps: float, delta: float) -> int:
    """Sample-count bound: ceil(2 ln(2/delta) / eps^2)."""
    return math.ceil(2.0 * math.log(2.0 / delta) / (eps * eps))


def build_grid(
    num_states: int, eps: float, delta: float, cap: int = DEFAULT_GRID_CAP
) -> KUniformGrid:
    """Uniform grid fine enough for the concentration argument behind the
    eps-persuasiveness guarantee.  Points are exact integer compositions."""
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ValidationError("eps and delta must lie in (0, 1)")
    k = grid_resolution(eps, delta)
    size = grid_size(num_states, k)
    if size > cap:
        raise CapExceededError(
            f"grid needs resolution {k} with {size} points, above the cap {cap}"
        )

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in compositions(total - head, parts - 1):
                yield (head,) + rest

    return KUniformGrid(k, tuple(compositions(k, num_states)))


def classify_and_complete(
    inst: PersuasionInstance,
    point: Sequence[float],
    eps: float,
    numerator: Optional[tuple[int, ...]] = None,
) -> GridProfile:
    """Threshold receivers at +-eps and complete the indifferent band.

    Classification at exactly +-eps resolves toward the free band (safe:
    the completion may still pick either action there).
    """
    f = _shared_objective(inst)
    p = np.asarray(point, dtype=float)
    expect = np.asarray(inst.payoff) @ p

    action1 = tuple(int(i) for i in np.nonzero(expect > eps + CLASSIFY_TOL)[0])
    action0 = tuple(int(i) for i in np.nonzero(expect < -eps - CLASSIFY_TOL)[0])
    free = tuple(i for i in range(inst.n) if i not in set(action1) | set(action0))

    fixed = {i: 1 for i in action1}
    fixed.update({i: 0 for i in action0})
    profile, _ = alpha_subroutine(f, fixed, free)
    return GridProfile(
        numerator=numerator if numerator is not None else tuple(),
        point=tuple(float(v) for v in p),
        action1=action1,
        action0=action0,
        free=free,
        profile=profile,
        value=f.value(profile.bits),
    )


def _shared_objective(inst: PersuasionInstance) -> SetFunction:
    f = inst.shared_objective
    if f is None:
        raise UnsupportedObjectiveError(
            "grid solver needs a state-independent objective"
        )
    return f


def decompose_prior(
    profiles: Sequence[GridProfile], prior: Sequence[float]
) -> np.ndarray:
    """Mixture weights over grid points that average to the prior.

    Maximizes the mixed value of the chosen profiles.  Always feasible:
    the simplex vertices belong to every grid, so the prior itself is a
    valid mixture of them.
    """
    lam = np.asarray(prior, dtype=float)
    d = len(lam)
    lp = LinearProgram(len(profiles), sense="max")
    lp.set_objective([gp.value for gp in profiles])
    for t in range(d):
        lp.add_constraint(
            {j: gp.point[t] for j, gp in enumerate(profiles)}, "==", float(lam[t])
        )
    lp.add_constraint({j: 1.0 for j in range(len(profiles))}, "==", 1.0)
    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"prior decomposition LP ended with status {sol.status}")
    return np.asarray(sol.x)


def solve_bicriteria(
    inst: PersuasionInstance,
    eps: float,
    delta: Optional[float] = None,
    grid_cap: int = DEFAULT_GRID_CAP,
) -> tuple[PublicScheme, float]:
    """Grid scheme that is eps-persuasive and near-optimal per objective class.

    delta defaults to eps (the coupling used by the grid-resolution
    formula); exposing it separately lets tests study the trade-off.
    Returns a scheme whose signals are the grid profiles; duplicate
    profiles from distinct posteriors remain distinct signals because
    merging would change their posteriors and slacks.
    """
    prior = np.asarray(inst.prior, dtype=float)
    if prior.min() < 1e-12:
        raise ValidationError("grid solver requires a strictly positive prior")
    _shared_objective(inst)
    if delta is None:
        delta = eps

    grid = build_grid(inst.num_states, eps, delta, cap=grid_cap)
    points = grid.points
    profiles = [
        classify_and_complete(inst, points[j], eps, numerator=grid.numerators[j])
        for j in range(len(grid))
    ]
    weights = decompose_prior(profiles, prior)

    keep = np.nonzero(weights > WEIGHT_PRUNE)[0]
    value = float(sum(weights[j] * profiles[j].value for j in keep))
    # Bayes inversion: emitting signal j with overall mass w_j and posterior
    # p_j requires state-conditional probability w_j * p_j[t] / prior[t]
    probs = np.empty((inst.num_states, len(keep)))
    for col, j in enumerate(keep):
        probs[:, col] = weights[j] * np.asarray(profiles[j].point) / prior
    probs /= probs.sum(axis=1, keepdims=True)

    scheme = PublicScheme(
        signals=tuple(profiles[j].profile for j in keep),
        probs=probs,
        allow_duplicate_signals=True,
    )
    logger.debug(
        "grid solve: %d points, %d in support, value %.6f", len(grid), len(keep), value
    )
    return scheme, value
