"""Set-function oracles and the combinatorial subroutines built on them.

Five concrete kinds are supported (explicit table, additive, anonymous,
coverage, cut).  Additive and coverage functions are monotone submodular by
construction and cut functions are non-monotone submodular by construction;
explicit tables carry declared flags that are only trusted after brute-force
verification.  All functions are immutable and all operations are pure, so
concurrent evaluation needs no synchronization.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapExceededError, UnsupportedObjectiveError, ValidationError
from .profiles import ActionProfile

STRUCTURE_CHECK_MAX_N = 16
EXHAUSTIVE_MAX_FREE = 20
_STRUCT_TOL = 1e-9


@dataclass(frozen=True)
class StructureFlags:
    """Tri-state structural knowledge: True/False when known, None otherwise."""

    monotone: Optional[bool] = None
    submodular: Optional[bool] = None
    supermodular: Optional[bool] = None


class SetFunction:
    """Common interface: a non-negative set function on n receivers."""

    kind: str = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    @property
    def flags(self) -> StructureFlags:
        raise NotImplementedError

    def value(self, bits: Sequence[int]) -> float:
        raise NotImplementedError

    def table(self) -> np.ndarray:
        """Dense value table indexed by subset index (2^n entries)."""
        if self.n > EXHAUSTIVE_MAX_FREE:
            raise CapExceededError(f"table of 2^{self.n} values is too large")
        return np.array(
            [self.value(ActionProfile.from_index(k, self.n).bits) for k in range(1 << self.n)]
        )


def _check_bits(f: SetFunction, bits: Sequence[int]) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != f.n:
        raise ValueError(f"profile has {len(bits)} bits, function expects {f.n}")
    return bits


@dataclass(frozen=True)
class ExplicitTable(SetFunction):
    """f given as a dense table; values[k] is f at the subset with index k."""

    values: tuple[float, ...]
    declared: StructureFlags = field(default_factory=StructureFlags)
    kind: str = field(default="explicit", init=False)

    def __post_init__(self):
        m = len(self.values)
        if m == 0 or m & (m - 1):
            raise ValidationError(f"explicit table length {m} is not a power of two")
        if min(self.values) < 0:
            raise ValidationError("explicit table has a negative value")

    @property
    def n(self) -> int:
        return len(self.values).bit_length() - 1

    @property
    def flags(self) -> StructureFlags:
        """Declared flags verified against the table (memoized on the table)."""
        return _verified_flags(self.values, self.declared)

    def value(self, bits: Sequence[int]) -> float:
        bits = _check_bits(self, bits)
        return float(self.values[sum(b << i for i, b in enumerate(bits))])

    def table(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@lru_cache(maxsize=1024)
def _verified_flags(values: tuple[float, ...], declared: StructureFlags) -> StructureFlags:
    checked = check_structure(ExplicitTable(values))
    for name in ("monotone", "submodular", "supermodular"):
        want = getattr(declared, name)
        if want is not None and want != checked[name]:
            raise ValidationError(
                f"declared flag {name}={want} fails brute-force verification"
            )
    return StructureFlags(**checked)


@dataclass(frozen=True)
class Additive(SetFunction):
    """f(S) = sum of per-receiver weights; weights must be non-negative."""

    weights: tuple[float, ...]
    kind: str = field(default="additive", init=False)

    def __post_init__(self):
        if min(self.weights, default=0.0) < 0:
            raise ValidationError("additive weights must be non-negative")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def flags(self) -> StructureFlags:
        return StructureFlags(monotone=True, submodular=True, supermodular=True)

    def value(self, bits: Sequence[int]) -> float:
        bits = _check_bits(self, bits)
        return float(sum(w for w, b in zip(self.weights, bits) if b))


@dataclass(frozen=True)
class Anonymous(SetFunction):
    """f(S) = by_size[|S|]; structure follows from the shape of by_size."""

    by_size: tuple[float, ...]
    kind: str = field(default="anonymous", init=False)

    def __post_init__(self):
        if len(self.by_size) < 1:
            raise ValidationError("anonymous spec needs n+1 values")
        if min(self.by_size) < 0:
            raise ValidationError("anonymous values must be non-negative")

    @property
    def n(self) -> int:
        return len(self.by_size) - 1

    @property
    def flags(self) -> StructureFlags:
        g = self.by_size
        gaps = [g[k + 1] - g[k] for k in range(len(g) - 1)]
        mono = all(d >= -_STRUCT_TOL for d in gaps)
        concave = all(gaps[k + 1] <= gaps[k] + _STRUCT_TOL for k in range(len(gaps) - 1))
        convex = all(gaps[k + 1] >= gaps[k] - _STRUCT_TOL for k in range(len(gaps) - 1))
        return StructureFlags(monotone=mono, submodular=concave, supermodular=convex)

    def value(self, bits: Sequence[int]) -> float:
        bits = _check_bits(self, bits)
        return float(self.by_size[sum(bits)])


@dataclass(frozen=True)
class Coverage(SetFunction):
    """Weighted coverage: f(S) = weight of the union of the receivers' covers."""

    element_weights: tuple[float, ...]
    covers: tuple[frozenset[int], ...]
    kind: str = field(default="coverage", init=False)

    def __post_init__(self):
        if min(self.element_weights, default=0.0) < 0:
            raise ValidationError("element weights must be non-negative")
        m = len(self.element_weights)
        for i, cov in enumerate(self.covers):
            if cov and (min(cov) < 0 or max(cov) >= m):
                raise ValidationError(f"cover of receiver {i} references unknown elements")

    @property
    def n(self) -> int:
        return len(self.covers)

    @property
    def flags(self) -> StructureFlags:
        return StructureFlags(monotone=True, submodular=True, supermodular=None)

    def value(self, bits: Sequence[int]) -> float:
        bits = _check_bits(self, bits)
        covered: set[int] = set()
        for cov, b in zip(self.covers, bits):
            if b:
                covered |= cov
        return float(sum(self.element_weights[e] for e in covered))


@dataclass(frozen=True)
class CutFunction(SetFunction):
    """Undirected weighted graph cut: f(S) = weight of edges crossing S."""

    num_receivers: int
    edges: tuple[tuple[int, int, float], ...]
    kind: str = field(default="cut", init=False)

    def __post_init__(self):
        for i, j, w in self.edges:
            if not (0 <= i < self.num_receivers and 0 <= j < self.num_receivers) or i == j:
                raise ValidationError(f"bad edge ({i},{j})")
            if w < 0:
                raise ValidationError("edge weights must be non-negative")

    @property
    def n(self) -> int:
        return self.num_receivers

    @property
    def flags(self) -> StructureFlags:
        return StructureFlags(monotone=False, submodular=True, supermodular=None)

    def value(self, bits: Sequence[int]) -> float:
        bits = _check_bits(self, bits)
        return float(sum(w for i, j, w in self.edges if bits[i] != bits[j]))


@dataclass(frozen=True)
class ChainDistribution:
    """Distribution on nested prefix sets T_0 c T_1 c ... c T_n."""

    prefixes: tuple[ActionProfile, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.prefixes) != len(self.probs):
            raise ValueError("prefixes and probs must align")
        if min(self.probs) < -1e-12:
            raise ValueError("chain probabilities must be non-negative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("chain probabilities must sum to 1")

    def marginals(self) -> np.ndarray:
        n = self.prefixes[-1].n
        marg = np.zeros(n)
        for prof, p in zip(self.prefixes, self.probs):
            marg += p * np.asarray(prof.bits, dtype=float)
        return marg


def evaluate(f: SetFunction, profile: Sequence[int] | ActionProfile) -> float:
    """Value-oracle access; raises on bit-length mismatch."""
    bits = profile.bits if isinstance(profile, ActionProfile) else profile
    return f.value(bits)


def check_structure(f: ExplicitTable) -> dict[str, bool]:
    """Brute-force monotonicity/submodularity/supermodularity of a table.

    Submodularity is checked through the pairwise diminishing-marginals
    condition f(S+i) + f(S+j) >= f(S+i+j) + f(S), which is equivalent to the
    subset form of the definition; monotonicity through single-element
    additions.
    """
    if not isinstance(f, ExplicitTable):
        raise UnsupportedObjectiveError("structure check needs an explicit table")
    n = f.n
    if n > STRUCTURE_CHECK_MAX_N:
        raise CapExceededError(f"structure check capped at n={STRUCTURE_CHECK_MAX_N}, got {n}")
    table = f.table()
    idx = np.arange(1 << n)

    monotone = True
    for i in range(n):
        base = idx[(idx >> i) & 1 == 0]
        if np.any(table[base | (1 << i)] < table[base] - _STRUCT_TOL):
            monotone = False
            break

    submodular = True
    supermodular = True
    for i in range(n):
        for j in range(i + 1, n):
            base = idx[((idx >> i) & 1 == 0) & ((idx >> j) & 1 == 0)]
            lhs = table[base | (1 << i)] + table[base | (1 << j)]
            rhs = table[base | (1 << i) | (1 << j)] + table[base]
            if np.any(lhs < rhs - _STRUCT_TOL):
                submodular = False
            if np.any(lhs > rhs + _STRUCT_TOL):
                supermodular = False
        if not submodular and not supermodular:
            break

    return {"monotone": monotone, "submodular": submodular, "supermodular": supermodular}


def _resolved_flags(f: SetFunction) -> StructureFlags:
    """Flags safe to act on: constructions are proofs, tables are verified."""
    if isinstance(f, ExplicitTable):
        return f.flags if f.n <= STRUCTURE_CHECK_MAX_N else StructureFlags()
    return f.flags


def _double_greedy(g, free: Sequence[int]) -> set[int]:
    """Deterministic double greedy on ground set `free`; ties include."""
    low: set[int] = set()
    high: set[int] = set(free)
    for e in free:
        gain_add = g(low | {e}) - g(low)
        gain_del = g(high - {e}) - g(high)
        if gain_add >= gain_del:
            low.add(e)
        else:
            high.discard(e)
    return low


def alpha_subroutine(
    f: SetFunction,
    fixed: dict[int, int],
    free: Iterable[int],
) -> tuple[ActionProfile, float]:
    """Complete a partially fixed profile to within a factor alpha of optimal.

    Monotone objectives take the all-ones completion (alpha = 1); submodular
    non-monotone objectives run deterministic double greedy on the restriction
    g(X) = f(X + fixed ones), which is again submodular (alpha = 1/2);
    explicit tables fall back to exhaustive search over at most 2^20
    completions (alpha = 1).
    """
    free = sorted(set(free))
    n = f.n
    if set(fixed) | set(free) != set(range(n)) or set(fixed) & set(free):
        raise ValueError("fixed and free must partition the receivers")

    flags = _resolved_flags(f)
    base = [0] * n
    for i, b in fixed.items():
        base[i] = int(b)

    if flags.monotone:
        for e in free:
            base[e] = 1
        return ActionProfile(tuple(base)), 1.0

    if flags.submodular:
        fixed_ones = {i for i, b in fixed.items() if b}

        def g(members: set[int]) -> float:
            chosen = fixed_ones | members
            return f.value(tuple(1 if i in chosen else 0 for i in range(n)))

        selected = _double_greedy(g, free)
        for e in free:
            base[e] = 1 if e in selected else 0
        return ActionProfile(tuple(base)), 0.5

    if isinstance(f, ExplicitTable) and len(free) <= EXHAUSTIVE_MAX_FREE:
        best_bits, best_val = None, -math.inf
        for pattern in itertools.product((0, 1), repeat=len(free)):
            for e, b in zip(free, pattern):
                base[e] = b
            val = f.value(tuple(base))
            if val > best_val:
                best_val, best_bits = val, tuple(base)
        return ActionProfile(best_bits), 1.0

    raise UnsupportedObjectiveError(
        f"no completion strategy for kind={f.kind} with flags {flags}"
    )


def maximize_minus_linear(
    f: SetFunction, weights: Sequence[float]
) -> tuple[ActionProfile, float]:
    """argmax_S f(S) - sum of weights over S, subject to no constraints."""
    w = np.asarray(weights, dtype=float)
    n = f.n
    if len(w) != n:
        raise ValueError(f"expected {n} weights, got {len(w)}")

    if isinstance(f, Additive):
        gains = np.asarray(f.weights) - w
        bits = tuple(1 if g > 0 else 0 for g in gains)
        return ActionProfile(bits), float(np.sum(gains[gains > 0]))

    if isinstance(f, Anonymous):
        # an optimal size-k set uses the k smallest weights (exchange argument)
        order = sorted(range(n), key=lambda i: (w[i], i))
        prefix = np.concatenate([[0.0], np.cumsum(w[order])])
        values = [f.by_size[k] - prefix[k] for k in range(n + 1)]
        best_k = max(range(n + 1), key=lambda k: (values[k], -k))
        return ActionProfile.from_subset(order[:best_k], n), float(values[best_k])

    if isinstance(f, ExplicitTable):
        if n > EXHAUSTIVE_MAX_FREE:
            raise CapExceededError(f"exhaustive search capped at n={EXHAUSTIVE_MAX_FREE}")
        totals = f.table().copy()
        idx = np.arange(1 << n)
        for i in range(n):
            totals[(idx >> i) & 1 == 1] -= w[i]
        best = int(np.argmax(totals))
        return ActionProfile.from_index(best, n), float(totals[best])

    raise UnsupportedObjectiveError(
        f"unconstrained maximization not supported for kind={f.kind}"
    )


def lovasz_chain_value(
    f: SetFunction, marginals: Sequence[float]
) -> tuple[ChainDistribution, float]:
    """Chain distribution with the given marginals and its expected value.

    Elements are sorted by descending marginal (ties by index); the chain is
    the prefix family of that order.  For submodular f the returned value is
    the minimum expected value over all distributions with these marginals.
    """
    x = np.asarray(marginals, dtype=float)
    n = f.n
    if len(x) != n:
        raise ValueError(f"expected {n} marginals, got {len(x)}")
    if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
        raise ValueError("marginals must lie in [0, 1]")
    x = np.clip(x, 0.0, 1.0)

    order = sorted(range(n), key=lambda i: (-x[i], i))
    sorted_x = np.concatenate([[1.0], x[order], [0.0]])

    prefixes, probs = [], []
    members: set[int] = set()
    for k in range(n + 1):
        prefixes.append(ActionProfile.from_subset(members, n))
        probs.append(float(sorted_x[k] - sorted_x[k + 1]))
        if k < n:
            members.add(order[k])

    value = float(sum(p * f.value(prof.bits) for prof, p in zip(prefixes, probs)))
    chain = ChainDistribution(tuple(prefixes), tuple(max(p, 0.0) for p in probs))
    return chain, value
