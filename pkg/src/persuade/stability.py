"""Worst-case noisy evaluation of set functions via an exact LP oracle.

A distribution over subsets is eps-noisy around S when every member of S
keeps marginal probability >= 1-eps and every non-member stays <= eps.
The oracle minimizes the expected function value over all such
distributions (2^n variables, exact at desk scale) and backs the stability
bounds: submodular functions lose at most a 2*eps fraction, monotone
submodular at most eps, and arbitrary functions at most n*eps of their
range.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, SolverError, UnsupportedObjectiveError
from .lp import LinearProgram, solve_lp
from .profiles import ActionProfile
from .setfuncs import ExplicitTable, SetFunction, check_structure, lovasz_chain_value

logger = logging.getLogger(__name__)

WORST_NOISE_MAX_N = 12
EPS_POOL = (0.05, 0.1, 0.2, 0.3, 0.45)


def worst_noise_value(
    f: SetFunction, around: ActionProfile, eps: float
) -> tuple[float, np.ndarray]:
    """Exact minimum of E f(T) over eps-noisy distributions around a set.

    Returns the minimum and a witness distribution (indexed by subset);
    the witness marginals satisfy the noise constraints within 1e-7.
    """
    n = f.n
    if n > WORST_NOISE_MAX_N:
        raise CapExceededError(f"noise oracle capped at n={WORST_NOISE_MAX_N}, got {n}")
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    size = 1 << n
    table = np.array([f.value(ActionProfile.from_index(k, n).bits) for k in range(size)])

    lp = LinearProgram(size, sense="min", objective=table)
    idx = np.arange(size)
    for i in range(n):
        members = {int(k): 1.0 for k in idx[(idx >> i) & 1 == 1]}
        if around[i]:
            lp.add_constraint(members, ">=", 1.0 - eps, tag=("keep", i))
        else:
            lp.add_constraint(members, "<=", eps, tag=("limit", i))
    lp.add_constraint({int(k): 1.0 for k in range(size)}, "==", 1.0, tag="mass")

    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"noise LP ended with status {sol.status}")
    return float(sol.objective), np.clip(sol.x, 0.0, None)


def witness_marginals(witness: np.ndarray) -> np.ndarray:
    n = (len(witness)).bit_length() - 1
    idx = np.arange(len(witness))
    return np.array([witness[(idx >> i) & 1 == 1].sum() for i in range(n)])


def chain_optimality_check(
    f: SetFunction, around: ActionProfile, eps: float, tol: float = 1e-6
) -> bool:
    """The chain built from the LP witness marginals attains the LP minimum.

    Holds for submodular f: the chain is the cheapest distribution with the
    witness's marginals, and those marginals are themselves noise-feasible.
    """
    lp_min, witness = worst_noise_value(f, around, eps)
    marg = np.clip(witness_marginals(witness), 0.0, 1.0)
    _, chain_value = lovasz_chain_value(f, marg)
    return abs(chain_value - lp_min) <= tol


@dataclass(frozen=True)
class StabilityTrial:
    subset: ActionProfile
    eps: float
    lp_min: float
    bound: float
    ratio: float  # lp_min / f(S); nan when f(S) is 0


@dataclass(frozen=True)
class StabilityReport:
    trials: tuple[StabilityTrial, ...]
    flags: dict
    min_ratio: float
    tightest: Optional[StabilityTrial]  # smallest slack over its bound
    ok: bool


def stability_bound(
    value_at_s: float, eps: float, n: int, max_value: float, flags: dict
) -> float:
    """Tightest guarantee applicable to the verified structure.

    The range-scaled n*eps bound applies to every function; submodularity
    tightens it to a 2*eps fraction and monotone submodularity to eps.
    """
    bound = value_at_s - n * eps * max_value
    if flags["submodular"]:
        bound = max(bound, (1.0 - 2.0 * eps) * value_at_s)
        if flags["monotone"]:
            bound = max(bound, (1.0 - eps) * value_at_s)
    return bound


def verify_stability_bounds(
    f: ExplicitTable,
    trials: int,
    seed: int,
    threads: int = 1,
    slack: float = 1e-6,
) -> StabilityReport:
    """Sample (S, eps) pairs and compare the LP oracle to the bounds.

    eps draws mix a fixed pool (tightness at small eps) with uniform draws
    toward 1/2; the trial schedule depends only on the seed, so the thread
    count never changes the result.
    """
    if not isinstance(f, ExplicitTable):
        raise UnsupportedObjectiveError("stability verification needs an explicit table")
    flags = check_structure(f)
    n = f.n
    table = f.table()
    max_value = float(table.max())

    rng = np.random.default_rng(seed)
    params = []
    for _ in range(trials):
        subset = ActionProfile.from_index(int(rng.integers(0, 1 << n)), n)
        if rng.random() < 0.5:
            eps = float(EPS_POOL[rng.integers(0, len(EPS_POOL))])
        else:
            eps = float(rng.uniform(0.01, 0.49))
        params.append((subset, eps))

    def run(param: tuple[ActionProfile, float]) -> StabilityTrial:
        subset, eps = param
        lp_min, _ = worst_noise_value(f, subset, eps)
        at_s = f.value(subset.bits)
        bound = stability_bound(at_s, eps, n, max_value, flags)
        ratio = lp_min / at_s if at_s > 1e-12 else float("nan")
        return StabilityTrial(subset, eps, lp_min, bound, ratio)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, params))
    else:
        results = [run(p) for p in params]

    ok = all(t.lp_min >= t.bound - slack for t in results)
    ratios = [t.ratio for t in results if not np.isnan(t.ratio)]
    tightest = min(results, key=lambda t: t.lp_min - t.bound, default=None)
    return StabilityReport(
        trials=tuple(results),
        flags=flags,
        min_ratio=min(ratios) if ratios else float("nan"),
        tightest=tightest,
        ok=ok,
    )
