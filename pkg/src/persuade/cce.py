"""Scalable cce-persuasive solving and its equivalence cross-validation.

The scalable path attacks the dual of the cce LP: polynomially many
variables (one per state plus one obedience multiplier per receiver) but a
constraint for every (state, signal) pair.  Unconstrained maximization of
the objective minus a linear function separates violated constraints, so
row generation solves the dual; the primal scheme is recovered by
re-solving over the generated columns and certified by a zero duality gap.

The reverse direction is exercised at desk scale only: a weighted-marginal
LP, the two-state persuasion instance derived from it, and a brute-force
cross-check that the instance's cce optimum is half the LP optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, SolverError, ValidationError
from .exact import extract_scheme, solve_cce_exact
from .lp import Constraint, LinearProgram, solve_lp, solve_with_cuts
from .model import PersuasionInstance, PublicScheme
from .profiles import ActionProfile
from .setfuncs import Additive, ExplicitTable, SetFunction, maximize_minus_linear

logger = logging.getLogger(__name__)

GAP_TOL = 1e-6
VIOLATION_TOL = 1e-7
WM_MAX_N = 12
VARIABLE_BOX = 1e8


def solve_cce_cutting(
    inst: PersuasionInstance, max_rounds: Optional[int] = None
) -> tuple[PublicScheme, float]:
    """Optimal cce-persuasive scheme via row generation on the dual.

    Every objective must support unconstrained maximize-minus-linear (the
    separation oracle).  The dual variables carry an artificial box that
    keeps intermediate relaxations bounded; it is enlarged and the solve
    repeated in the unlikely event it binds at termination.
    """
    box = VARIABLE_BOX
    for _ in range(3):
        result = _cutting_round(inst, box, max_rounds)
        if result is not None:
            return result
        box *= 100.0
        logger.warning("dual variable box bound was active; retrying with %g", box)
    raise SolverError("cce dual box kept binding; instance is badly scaled")


def _cutting_round(
    inst: PersuasionInstance, box: float, max_rounds: Optional[int]
) -> Optional[tuple[PublicScheme, float]]:
    d, n = inst.num_states, inst.n
    prior = np.asarray(inst.prior)
    payoff = np.asarray(inst.payoff)
    prior_opt = np.maximum(payoff @ prior, 0.0)
    empty = ActionProfile.from_index(0, n)
    full = ActionProfile.from_index((1 << n) - 1, n)

    # variables: one per state, then one obedience multiplier per receiver
    lp = LinearProgram(d + n, sense="min")
    lp.set_objective(np.concatenate([np.ones(d), -prior_opt]))
    for t in range(d):
        lp.set_bounds(t, -box, box)
    for i in range(n):
        lp.set_bounds(d + i, 0.0, box)

    def dual_row(t: int, sig: ActionProfile) -> Constraint:
        coeffs = {t: 1.0}
        for i in sig.subset:
            coeffs[d + i] = -prior[t] * payoff[i, t]
        rhs = prior[t] * inst.objective_for(t).value(sig.bits)
        return Constraint(coeffs, ">=", rhs, tag=(t, sig))

    for t in range(d):
        lp.rows.append(dual_row(t, empty))
        lp.rows.append(dual_row(t, full))

    def oracle(z: np.ndarray) -> list[Constraint]:
        cuts = []
        for t in range(d):
            y = z[d:]
            weights = -y * payoff[:, t]
            sig, best = maximize_minus_linear(inst.objective_for(t), weights)
            if z[t] < prior[t] * best - VIOLATION_TOL:
                cuts.append(dual_row(t, sig))
        return cuts

    sol, cuts = solve_with_cuts(lp, oracle, max_rounds)
    if sol.status == "round-limit":
        raise SolverError("cce cut loop hit the round limit")
    if not sol.is_optimal:
        raise SolverError(f"cce dual ended with status {sol.status}: {sol.message}")

    columns = sorted(
        {(t, sig) for t, sig in (row.tag for row in lp.rows)},
        key=lambda c: (c[0], c[1].index),
    )
    scheme, value = _recover_primal(inst, columns, prior_opt)
    gap = abs(value - sol.objective)
    if gap > GAP_TOL:
        # a binding artificial box (flat dual rays park the optimizer there)
        # is the only legitimate cause; the caller retries with a larger box
        logger.debug("duality gap %.3e at box %g", gap, box)
        return None
    return scheme, value


def _recover_primal(
    inst: PersuasionInstance,
    columns: Sequence[tuple[int, ActionProfile]],
    prior_opt: np.ndarray,
) -> tuple[PublicScheme, float]:
    """Solve the cce primal restricted to the generated (state, signal)
    columns; by LP duality its optimum equals the converged dual value."""
    d, n = inst.num_states, inst.n
    prior = np.asarray(inst.prior)
    lp = LinearProgram(len(columns), sense="max")
    lp.set_objective(
        [prior[t] * inst.objective_for(t).value(sig.bits) for t, sig in columns]
    )
    for i in range(n):
        coeffs = {
            j: prior[t] * inst.payoff[i, t]
            for j, (t, sig) in enumerate(columns)
            if sig[i]
        }
        lp.add_constraint(coeffs, ">=", float(prior_opt[i]), tag=("cce", i))
    for t in range(d):
        coeffs = {j: 1.0 for j, (tj, _) in enumerate(columns) if tj == t}
        lp.add_constraint(coeffs, "==", 1.0, tag=("norm", t))
    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"primal recovery ended with status {sol.status}")

    signals = sorted({sig for _, sig in columns}, key=lambda s: s.index)
    pos = {sig: k for k, sig in enumerate(signals)}
    phi = np.zeros((d, len(signals)))
    for j, (t, sig) in enumerate(columns):
        phi[t, pos[sig]] += sol.x[j]
    return extract_scheme(inst, signals, phi), float(sol.objective)


@dataclass(frozen=True)
class ReductionSpec:
    """Weighted-marginal problem data: a set function, per-receiver targets
    in [0, 1], and the partition into upper- and lower-bounded receivers.

    Targets outside [0, 1] are clamped (values beyond that range leave the
    feasible region unchanged or empty in a way the clamp preserves)."""

    objective: SetFunction
    beta: tuple[float, ...]
    upper: frozenset[int]  # marginal of these receivers is capped at beta
    lower: frozenset[int]  # marginal of these receivers must reach beta

    def __post_init__(self):
        n = self.objective.n
        if len(self.beta) != n:
            raise ValidationError(f"need {n} beta entries, got {len(self.beta)}")
        if self.upper | self.lower != set(range(n)) or self.upper & self.lower:
            raise ValidationError("upper and lower must partition the receivers")
        clamped = tuple(min(1.0, max(0.0, b)) for b in self.beta)
        if clamped != tuple(self.beta):
            logger.warning("clamped beta targets to [0, 1]: %s -> %s", self.beta, clamped)
            object.__setattr__(self, "beta", clamped)


def build_reduction_instance(spec: ReductionSpec) -> PersuasionInstance:
    """Two-state persuasion instance whose cce optimum is half the
    weighted-marginal optimum.

    The sender's objective vanishes in the first state and equals the
    spec's function in the second; payoffs make the first state's
    recommendations trivially obeyed while the second state's marginals
    reproduce the spec's bounds.
    """
    n = spec.objective.n
    payoff = np.zeros((n, 2))
    for i in range(n):
        if i in spec.upper:
            payoff[i, 0] = spec.beta[i]
            payoff[i, 1] = -1.0
        else:
            payoff[i, 0] = -(1.0 - spec.beta[i])
            payoff[i, 1] = 1.0
    zero = Additive((0.0,) * n)
    return PersuasionInstance(
        states=("silent", "live"),
        prior=(0.5, 0.5),
        payoff=payoff,
        objective=(zero, spec.objective),
    )


def solve_wm_primal_bruteforce(spec: ReductionSpec) -> tuple[np.ndarray, float]:
    """Exact weighted-marginal LP over all 2^n subset probabilities."""
    n = spec.objective.n
    if n > WM_MAX_N:
        raise CapExceededError(f"weighted-marginal brute force capped at n={WM_MAX_N}")
    size = 1 << n
    values = np.array(
        [spec.objective.value(ActionProfile.from_index(k, n).bits) for k in range(size)]
    )
    lp = LinearProgram(size, sense="max", objective=values)
    idx = np.arange(size)
    for i in range(n):
        members = {int(k): 1.0 for k in idx[(idx >> i) & 1 == 1]}
        relation = "<=" if i in spec.upper else ">="
        lp.add_constraint(members, relation, float(spec.beta[i]), tag=("marginal", i))
    lp.add_constraint({int(k): 1.0 for k in range(size)}, "==", 1.0, tag="mass")
    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"weighted-marginal LP ended with status {sol.status}")
    return np.clip(sol.x, 0.0, None), float(sol.objective)


def wm_dual_alpha_nonpositive(
    beta: Sequence[float],
    alpha: float,
    upper: frozenset[int] | set[int],
    lower: frozenset[int] | set[int],
) -> float:
    """Closed-form optimum of the weighted-marginal dual when alpha <= 0.

    Returns -inf (unbounded) or 0.  A negative alpha lets the free value
    variable run away; with alpha = 0, a sign-incompatible objective
    coefficient does the same through the corresponding weight; otherwise
    every feasible objective is non-negative and w = 0 with a large value
    variable attains 0.
    """
    if alpha > 0:
        raise ValueError("closed form only covers alpha <= 0")
    if alpha < 0:
        return -math.inf
    if any(beta[i] < 0 for i in upper) or any(beta[i] > 0 for i in lower):
        return -math.inf
    return 0.0


@dataclass(frozen=True)
class EquivalenceReport:
    cce_value: float
    wm_value: float
    scheme: PublicScheme
    marginals: tuple[float, ...]
    marginal_feasible: bool
    ok: bool
    message: str = ""


def crossvalidate_equivalence(spec: ReductionSpec, tol: float = GAP_TOL) -> EquivalenceReport:
    """Check cce optimum = half the weighted-marginal optimum on the
    constructed instance.

    The first state's row is pinned to always recommend the upper set
    (each receiver's true best action there), which loses nothing and
    makes the live-state rows a feasible weighted-marginal solution.
    """
    n = spec.objective.n
    if n > 10:
        raise CapExceededError("equivalence cross-validation capped at n=10")
    inst = build_reduction_instance(spec)
    pin = ActionProfile.from_subset(spec.upper, n)
    scheme, cce_value = solve_cce_exact(inst, pin_state_signal=(0, pin))
    _, wm_value = solve_wm_primal_bruteforce(spec)

    # live-state marginals of the optimal scheme must satisfy the spec bounds
    live_row = scheme.probs[1, :]
    marginals = np.zeros(n)
    for k, sig in enumerate(scheme.signals):
        for i in sig.subset:
            marginals[i] += live_row[k]
    feasible = all(
        marginals[i] <= spec.beta[i] + tol for i in spec.upper
    ) and all(marginals[i] >= spec.beta[i] - tol for i in spec.lower)

    ok = abs(cce_value - 0.5 * wm_value) <= tol and feasible
    message = "" if ok else (
        f"cce={cce_value!r} vs half-wm={0.5 * wm_value!r}, "
        f"marginals feasible: {feasible}"
    )
    return EquivalenceReport(
        cce_value=cce_value,
        wm_value=wm_value,
        scheme=scheme,
        marginals=tuple(float(m) for m in marginals),
        marginal_feasible=feasible,
        ok=ok,
        message=message,
    )
