"""Brute-force exact solvers over all 2^n signals.

These are the ground-truth oracles of the repository: exponential in the
receiver count (capped at n = 12) but exact, used to validate every
scalable solver.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import CapExceededError, SolverError, ValidationError
from .lp import LinearProgram, solve_lp
from .model import PersuasionInstance, PublicScheme
from .profiles import ActionProfile

EXACT_MAX_N = 12
SUPPORT_PRUNE = 1e-10


def objective_tables(inst: PersuasionInstance, signals: list[ActionProfile]) -> np.ndarray:
    """values[t, k] = f_t(S_k); each profile is evaluated once per state."""
    return np.array(
        [[inst.objective_for(t).value(s.bits) for s in signals]
         for t in range(inst.num_states)]
    )


def extract_scheme(
    inst: PersuasionInstance,
    signals: list[ActionProfile],
    phi: np.ndarray,
    allow_duplicates: bool = False,
) -> PublicScheme:
    """Drop signals of negligible total mass and renormalize the rows."""
    prior = np.asarray(inst.prior)
    mass = prior @ phi
    keep = np.nonzero(mass >= SUPPORT_PRUNE)[0]
    if len(keep) == 0:
        keep = np.array([int(np.argmax(mass))])
    probs = np.clip(phi[:, keep], 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return PublicScheme(
        signals=tuple(signals[k] for k in keep),
        probs=probs,
        allow_duplicate_signals=allow_duplicates,
    )


def solve_restricted_persuasive(
    inst: PersuasionInstance,
    signals: list[ActionProfile],
    mode: str = "exact",
    eps: float = 0.0,
) -> tuple[PublicScheme, float]:
    """Optimal (eps-)persuasive scheme restricted to a candidate signal set.

    Variables are the per-state emission probabilities of each candidate; a
    signal's obedience row for receiver i is >= -eps when i is recommended
    action 1 and <= eps otherwise (eps = 0 in exact mode).
    """
    if mode not in ("exact", "eps"):
        raise ValueError(f"unknown persuasive mode {mode!r}")
    if mode == "exact":
        eps = 0.0
    elif np.abs(inst.payoff).max() > 1.0 + 1e-9:
        raise ValidationError("eps-persuasive solves require payoffs in [-1, 1]")

    d, K = inst.num_states, len(signals)
    prior = np.asarray(inst.prior)
    values = objective_tables(inst, signals)

    lp = LinearProgram(d * K, sense="max")
    lp.set_objective((prior[:, None] * values).reshape(-1))

    def var(t: int, k: int) -> int:
        return t * K + k

    for k, sig in enumerate(signals):
        for i in range(inst.n):
            coeffs = {var(t, k): prior[t] * inst.payoff[i, t] for t in range(d)}
            if sig[i]:
                lp.add_constraint(coeffs, ">=", -eps, tag=("obey1", k, i))
            else:
                lp.add_constraint(coeffs, "<=", eps, tag=("obey0", k, i))
    for t in range(d):
        lp.add_constraint({var(t, k): 1.0 for k in range(K)}, "==", 1.0, tag=("norm", t))

    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"persuasive LP ended with status {sol.status}: {sol.message}")
    phi = sol.x.reshape(d, K)
    return extract_scheme(inst, signals, phi), float(sol.objective)


def solve_persuasive_exact(
    inst: PersuasionInstance, mode: str = "exact", eps: float = 0.0
) -> tuple[PublicScheme, float]:
    """Optimal persuasive (or eps-persuasive) scheme via full enumeration."""
    if inst.n > EXACT_MAX_N:
        raise CapExceededError(f"exact solver capped at n={EXACT_MAX_N}, got {inst.n}")
    signals = [ActionProfile.from_index(k, inst.n) for k in range(1 << inst.n)]
    return solve_restricted_persuasive(inst, signals, mode=mode, eps=eps)


def solve_cce_exact(
    inst: PersuasionInstance,
    pin_state_signal: Optional[tuple[int, ActionProfile]] = None,
) -> tuple[PublicScheme, float]:
    """Optimal cce-persuasive scheme via full enumeration.

    Obedience is aggregate: each receiver's expected payoff from following
    all recommendations must beat the best response to the prior.
    `pin_state_signal` forces one state's row onto a single signal, which the
    reduction cross-validation uses; it is harmless for ordinary solves.
    """
    if inst.n > EXACT_MAX_N:
        raise CapExceededError(f"exact solver capped at n={EXACT_MAX_N}, got {inst.n}")
    d, n = inst.num_states, inst.n
    K = 1 << n
    signals = [ActionProfile.from_index(k, n) for k in range(K)]
    prior = np.asarray(inst.prior)
    values = objective_tables(inst, signals)

    lp = LinearProgram(d * K, sense="max")
    lp.set_objective((prior[:, None] * values).reshape(-1))

    def var(t: int, k: int) -> int:
        return t * K + k

    prior_opt = np.maximum(inst.payoff @ prior, 0.0)
    for i in range(n):
        coeffs = {
            var(t, k): prior[t] * inst.payoff[i, t]
            for t in range(d)
            for k in range(K)
            if (k >> i) & 1
        }
        lp.add_constraint(coeffs, ">=", float(prior_opt[i]), tag=("cce", i))
    for t in range(d):
        lp.add_constraint({var(t, k): 1.0 for k in range(K)}, "==", 1.0, tag=("norm", t))
    if pin_state_signal is not None:
        t_pin, sig = pin_state_signal
        lp.add_constraint({var(t_pin, sig.index): 1.0}, "==", 1.0, tag=("pin", t_pin))

    sol = solve_lp(lp)
    if not sol.is_optimal:
        raise SolverError(f"cce LP ended with status {sol.status}: {sol.message}")
    phi = sol.x.reshape(d, K)
    return extract_scheme(inst, signals, phi), float(sol.objective)
