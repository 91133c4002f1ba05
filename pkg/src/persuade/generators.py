"""Seeded generators for instances, objectives, and arrangements.

Every generator is a pure function of its parameters and seed, so repeated
calls produce identical objects (and identical JSON through the canonical
serializer).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .arrangement import Hyperplane, check_nondegeneracy
from .auction import AuctionInstance, AuctionType
from .cce import ReductionSpec
from .errors import ValidationError
from .model import PersuasionInstance
from .setfuncs import (
    Additive,
    Anonymous,
    Coverage,
    CutFunction,
    ExplicitTable,
    SetFunction,
    StructureFlags,
)

OBJECTIVE_KINDS = ("additive", "anonymous", "coverage", "cut", "explicit")


def _state_names(d: int) -> tuple[str, ...]:
    return tuple(f"state{t}" for t in range(d))


def random_objective(kind: str, n: int, rng: np.random.Generator) -> SetFunction:
    if kind == "additive":
        return Additive(tuple(float(w) for w in rng.uniform(0.0, 1.0, size=n)))
    if kind == "anonymous":
        gaps = rng.uniform(0.0, 1.0, size=n)
        return Anonymous((0.0,) + tuple(float(v) for v in np.cumsum(gaps)))
    if kind == "coverage":
        return random_coverage_objective(n, rng)
    if kind == "cut":
        return random_cut_objective(n, rng)
    if kind == "explicit":
        return ExplicitTable(tuple(float(v) for v in rng.uniform(0.0, 1.0, size=1 << n)))
    raise ValidationError(f"unknown objective kind {kind!r}")


def random_coverage_objective(
    n: int, rng: np.random.Generator, num_elements: Optional[int] = None
) -> Coverage:
    m = num_elements if num_elements is not None else max(2 * n, 4)
    weights = tuple(float(w) for w in rng.uniform(0.0, 1.0, size=m))
    covers = []
    for _ in range(n):
        size = int(rng.integers(1, max(2, m // 2)))
        covers.append(frozenset(int(e) for e in rng.choice(m, size=size, replace=False)))
    return Coverage(weights, tuple(covers))


def random_cut_objective(
    n: int, rng: np.random.Generator, edge_prob: float = 0.6
) -> CutFunction:
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((i, j, float(rng.uniform(0.1, 1.0))))
    if not edges:
        i, j = sorted(rng.choice(n, size=2, replace=False)) if n >= 2 else (0, 0)
        edges.append((int(i), int(j), 1.0))
    return CutFunction(n, tuple(edges))


def random_monotone_submodular_table(n: int, rng: np.random.Generator) -> ExplicitTable:
    """Concave profile of a random additive function (verifiably monotone
    submodular)."""
    weights = rng.uniform(0.1, 1.0, size=n)
    power = float(rng.uniform(0.3, 0.9))
    values = []
    for k in range(1 << n):
        total = sum(weights[i] for i in range(n) if (k >> i) & 1)
        values.append(float(total**power))
    return ExplicitTable(tuple(values), declared=StructureFlags(monotone=True, submodular=True))


def random_submodular_table(n: int, rng: np.random.Generator) -> ExplicitTable:
    """Cut plus coverage mixture: submodular, generally non-monotone."""
    cut = random_cut_objective(n, rng)
    cov = random_coverage_objective(n, rng)
    scale = float(rng.uniform(0.2, 0.8))
    values = []
    for k in range(1 << n):
        bits = tuple((k >> i) & 1 for i in range(n))
        values.append(cut.value(bits) + scale * cov.value(bits))
    return ExplicitTable(tuple(values), declared=StructureFlags(submodular=True))


def random_uniform_instance(
    n: int,
    d: int,
    seed: int,
    objective_kind: str = "additive",
    per_state: bool = False,
    nondegenerate: bool = False,
) -> PersuasionInstance:
    """Payoffs uniform on [-1, 1], prior from a flat Dirichlet."""
    rng = np.random.default_rng(seed)
    for _ in range(200):
        payoff = rng.uniform(-1.0, 1.0, size=(n, d))
        prior = rng.dirichlet(np.ones(d))
        if prior.min() < 1e-3:  # keep posteriors well defined
            continue
        if objective_kind == "explicit" and per_state:
            objective: SetFunction | tuple[SetFunction, ...] = tuple(
                random_objective("explicit", n, rng) for _ in range(d)
            )
        else:
            objective = random_objective(objective_kind, n, rng)
        inst = PersuasionInstance(
            states=_state_names(d),
            prior=tuple(float(p) for p in prior),
            payoff=payoff,
            objective=objective,
        )
        if nondegenerate and check_nondegeneracy(inst) is not None:
            continue
        return inst
    raise ValidationError("failed to draw an acceptable instance in 200 attempts")


def example_degenerate_instance(n: int, objective: Optional[SetFunction] = None) -> PersuasionInstance:
    """Every receiver prefers action 1 in the first of two equiprobable
    states and action 0 in the second; no information helps the sender
    beyond picking the best profile, and the payoffs are maximally
    degenerate."""
    payoff = np.tile(np.array([1.0, -1.0]), (n, 1))
    return PersuasionInstance(
        states=("good", "bad"),
        prior=(0.5, 0.5),
        payoff=payoff,
        objective=objective if objective is not None else Additive((1.0,) * n),
    )


def supermodular_indicator_instance(n: int) -> ExplicitTable:
    """Indicator of the full set: the worst case for noise stability."""
    values = tuple(1.0 if k == (1 << n) - 1 else 0.0 for k in range(1 << n))
    return ExplicitTable(values, declared=StructureFlags(monotone=True, supermodular=True))


def random_reduction_spec(n: int, seed: int, kind: str = "explicit") -> ReductionSpec:
    rng = np.random.default_rng(seed)
    upper = frozenset(int(i) for i in range(n) if rng.random() < 0.5)
    lower = frozenset(range(n)) - upper
    return ReductionSpec(
        objective=random_objective(kind, n, rng),
        beta=tuple(float(b) for b in rng.uniform(0.0, 1.0, size=n)),
        upper=upper,
        lower=lower,
    )


def random_auction_instance(
    n: int, d: int, num_types: int, seed: int
) -> AuctionInstance:
    rng = np.random.default_rng(seed)
    q = rng.dirichlet(np.ones(num_types))
    prior = rng.dirichlet(np.ones(d))
    return AuctionInstance(
        states=_state_names(d),
        prior=tuple(float(p) for p in prior),
        types=tuple(
            AuctionType(float(q[t]), rng.uniform(0.0, 1.0, size=(n, d)))
            for t in range(num_types)
        ),
    )


def random_general_position_arrangement(
    m: int, d: int, seed: int, max_flat_norm: float = 4.0
) -> list[Hyperplane]:
    """Random planes re-drawn until every flat is well conditioned and near
    the origin, so counting bounds hold with equality and boxes stay small."""
    rng = np.random.default_rng(seed)
    for _ in range(500):
        normals = rng.normal(size=(m, d))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = rng.uniform(-1.0, 1.0, size=m)
        if _general_position(normals, offsets, d, max_flat_norm):
            return [
                Hyperplane(tuple(normals[j]), float(offsets[j])) for j in range(m)
            ]
    raise ValidationError("failed to draw a general-position arrangement")


def _general_position(normals: np.ndarray, offsets: np.ndarray, d: int, max_flat_norm: float) -> bool:
    import itertools

    m = len(normals)
    for k in range(2, d + 1):
        for sub in itertools.combinations(range(m), k):
            mat = normals[list(sub)]
            svals = np.linalg.svd(mat, compute_uv=False)
            if svals[-1] < 0.2:
                return False
            x = np.linalg.lstsq(mat, offsets[list(sub)], rcond=None)[0]
            if np.abs(x).max() > max_flat_norm:
                return False
    if d == 1 and len(set(np.round(offsets / normals[:, 0], 6))) < m:
        return False  # coincident points on the line
    # no d+1 planes may share a point (checked via flat consistency)
    if m > d:
        for sub in itertools.combinations(range(m), d + 1):
            mat = normals[list(sub)]
            rhs = offsets[list(sub)]
            x = np.linalg.lstsq(mat, rhs, rcond=None)[0]
            if np.linalg.norm(mat @ x - rhs) < 1e-9:
                return False
    return True
