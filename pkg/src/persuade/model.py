"""Persuasion instances, public schemes, and persuasiveness verification.

All types are immutable after construction and every operation is a pure
function of its inputs, so concurrent use needs no locking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ValidationError
from .profiles import ActionProfile
from .setfuncs import SetFunction

PERSUASIVENESS_TOL = 1e-7
PROB_SUM_TOL = 1e-9
SCHEME_ROW_TOL = 1e-7
ZERO_MASS = 1e-12


class ZeroProbability:
    """Marker result: the signal is emitted with (numerically) zero mass."""

    def __repr__(self) -> str:
        return "ZeroProbability"


ZERO_PROBABILITY = ZeroProbability()


@dataclass(frozen=True, eq=False)
class PersuasionInstance:
    """Prior over states, receiver net payoffs, and sender objectives.

    payoff[i, t] is how much receiver i prefers action 1 over action 0 in
    state t.  The objective is either a single set function shared by all
    states or one per state.
    """

    states: tuple[str, ...]
    prior: np.ndarray
    payoff: np.ndarray
    objective: Union[SetFunction, tuple[SetFunction, ...]]

    def __post_init__(self):
        object.__setattr__(self, "prior", _frozen_array(self.prior))
        object.__setattr__(self, "payoff", _frozen_array(self.payoff))

    @property
    def n(self) -> int:
        return self.payoff.shape[0]

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def objectives(self) -> tuple[SetFunction, ...]:
        if isinstance(self.objective, SetFunction):
            return (self.objective,) * self.num_states
        return tuple(self.objective)

    def objective_for(self, state_idx: int) -> SetFunction:
        return self.objectives[state_idx]

    @property
    def shared_objective(self) -> Optional[SetFunction]:
        """The common objective if one is shared by every state, else None."""
        if isinstance(self.objective, SetFunction):
            return self.objective
        first = self.objective[0]
        return first if all(f == first for f in self.objective[1:]) else None


def _frozen_array(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Posterior:
    """Belief over states after observing a signal."""

    p: tuple[float, ...]

    def __post_init__(self):
        if min(self.p) < -PROB_SUM_TOL:
            raise ValidationError("posterior entries must be non-negative")
        if abs(sum(self.p) - 1.0) > PROB_SUM_TOL:
            raise ValidationError("posterior must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p)


@dataclass(frozen=True, eq=False)
class PublicScheme:
    """Signals (action profiles) and per-state emission probabilities.

    probs[t, k] is the probability of emitting signal k in state t.  Rows
    must sum to 1 within 1e-7; entries in (-1e-12, 0) are clamped to 0.
    Duplicate profiles are rejected unless explicitly allowed (grid-based
    schemes legitimately emit the same recommendation from distinct
    posteriors).
    """

    signals: tuple[ActionProfile, ...]
    probs: np.ndarray
    allow_duplicate_signals: bool = False

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[1] != len(self.signals):
            raise ValidationError(
                f"probs shape {probs.shape} does not match {len(self.signals)} signals"
            )
        if probs.size and probs.min() < -ZERO_MASS:
            raise ValidationError(f"negative signal probability {probs.min():.3e}")
        probs = np.where(probs < 0.0, 0.0, probs)
        row_sums = probs.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > SCHEME_ROW_TOL):
            raise ValidationError(f"scheme rows must sum to 1, got {row_sums}")
        if not self.allow_duplicate_signals and len(set(self.signals)) != len(self.signals):
            raise ValidationError("duplicate signal profiles")
        lengths = {s.n for s in self.signals}
        if len(lengths) > 1:
            raise ValidationError("signals have inconsistent lengths")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def num_signals(self) -> int:
        return len(self.signals)

    def signal_mass(self, prior: np.ndarray) -> np.ndarray:
        """Unconditional emission probability of each signal."""
        return np.asarray(prior) @ self.probs


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...]


def validate_instance(inst: PersuasionInstance, eps_mode: bool = False) -> ValidationResult:
    """Check all instance invariants; violations are returned, not raised."""
    problems: list[str] = []
    d = inst.num_states

    prior = np.asarray(inst.prior)
    if prior.shape != (d,):
        problems.append(f"prior has {prior.shape} entries, expected {d}")
    else:
        if prior.min() < 0:
            problems.append(f"prior entry {int(np.argmin(prior))} is negative")
        total = float(prior.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            problems.append(f"prior sums to {total!r}")
        for t in np.nonzero(prior < ZERO_MASS)[0]:
            problems.append(f"state {int(t)} has zero prior probability")

    payoff = np.asarray(inst.payoff)
    if payoff.ndim != 2 or payoff.shape[1] != d:
        problems.append(f"payoff shape {payoff.shape} is not n x {d}")
    elif eps_mode and np.abs(payoff).max(initial=0.0) > 1.0 + 1e-9:
        bad = np.unravel_index(int(np.argmax(np.abs(payoff))), payoff.shape)
        problems.append(
            f"payoff out of [-1,1] at receiver {bad[0]}, state {bad[1]} "
            f"(required whenever an eps-persuasive solve is requested)"
        )

    objectives = inst.objectives
    if len(objectives) != d:
        problems.append(f"{len(objectives)} per-state objectives for {d} states")
    for t, f in enumerate(objectives):
        if f.n != inst.n:
            problems.append(f"objective for state {t} is over {f.n} receivers, expected {inst.n}")

    return ValidationResult(ok=not problems, violations=tuple(problems))


def posterior_of_signal(
    inst: PersuasionInstance, scheme: PublicScheme, k: int
) -> Union[Posterior, ZeroProbability]:
    """Bayes update for signal k; ZERO_PROBABILITY when its mass vanishes."""
    if not 0 <= k < scheme.num_signals:
        raise IndexError(f"signal index {k} out of range")
    joint = np.asarray(inst.prior) * scheme.probs[:, k]
    mass = float(joint.sum())
    if mass < ZERO_MASS:
        return ZERO_PROBABILITY
    return Posterior(tuple(float(v) for v in joint / mass))


@dataclass(frozen=True)
class PersuasivenessReport:
    """Slacks and aggregates used by every persuasiveness mode.

    slack[k, i] is the unnormalized obedience margin of receiver i at signal
    k; cce_lhs[i] sums it over the signals recommending action 1 to i;
    prior_opt[i] is i's best utility from acting on the prior alone.
    """

    mode: str
    eps: float
    slack: np.ndarray
    cce_lhs: np.ndarray
    prior_opt: np.ndarray
    sender_value: float
    live_signals: np.ndarray
    passed: bool

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "eps": self.eps,
            "slack": self.slack.tolist(),
            "cce_lhs": self.cce_lhs.tolist(),
            "prior_opt": self.prior_opt.tolist(),
            "sender_value": self.sender_value,
            "live_signals": self.live_signals.astype(bool).tolist(),
            "passed": bool(self.passed),
        }


def verify_scheme(
    inst: PersuasionInstance,
    scheme: PublicScheme,
    mode: str = "exact",
    eps: float = 0.0,
) -> tuple[PersuasivenessReport, bool]:
    """Check a scheme for exact-, eps-, or cce-persuasiveness.

    Signals with total probability below 1e-12 are vacuous and skipped.
    Tolerance 1e-7 absorbs double-precision LP residuals; a slack of exactly
    0 is accepted for either action, which realizes sender-favorable tie
    breaking.
    """
    if mode not in ("exact", "eps", "cce"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "eps":
        eps = 0.0

    prior = np.asarray(inst.prior)
    pi = scheme.probs  # (d, K)
    payoff = np.asarray(inst.payoff)  # (n, d)
    membership = np.array([s.bits for s in scheme.signals], dtype=bool)  # (K, n)

    weighted = prior[:, None] * pi  # (d, K)
    slack = weighted.T @ payoff.T  # (K, n)
    cce_lhs = np.where(membership, slack, 0.0).sum(axis=0)  # (n,)
    prior_opt = np.maximum(payoff @ prior, 0.0)

    values = np.array(
        [[inst.objective_for(t).value(s.bits) for s in scheme.signals]
         for t in range(inst.num_states)]
    )
    sender_value = float((prior[:, None] * pi * values).sum())

    live = weighted.sum(axis=0) >= ZERO_MASS  # (K,)

    if mode == "cce":
        passed = bool(np.all(cce_lhs >= prior_opt - PERSUASIVENESS_TOL))
    else:
        lo_ok = slack >= -eps - PERSUASIVENESS_TOL
        hi_ok = slack <= eps + PERSUASIVENESS_TOL
        per_signal_ok = np.where(membership, lo_ok, hi_ok)
        passed = bool(np.all(per_signal_ok[live, :]))

    report = PersuasivenessReport(
        mode=mode,
        eps=eps,
        slack=slack,
        cce_lhs=cce_lhs,
        prior_opt=prior_opt,
        sender_value=sender_value,
        live_signals=live,
        passed=passed,
    )
    return report, passed
