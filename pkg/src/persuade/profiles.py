"""Binary action profiles over a fixed set of receivers.

A profile is a length-n bit vector; bit i is the action recommended to
receiver i.  Profiles are interchangeable with subsets of receivers (the
receivers playing action 1) and with table indices: the index of a subset S
is the integer with bit i set iff receiver i is in S (bit 0 = first
receiver).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True, order=True)
class ActionProfile:
    """Immutable, hashable, totally ordered bit vector."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"profile bits must be 0/1, got {self.bits!r}")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "ActionProfile":
        return cls(tuple(int(b) for b in bits))

    @classmethod
    def from_subset(cls, subset: Iterable[int], n: int) -> "ActionProfile":
        members = set(subset)
        if members and (min(members) < 0 or max(members) >= n):
            raise ValueError(f"subset {sorted(members)} out of range for n={n}")
        return cls(tuple(1 if i in members else 0 for i in range(n)))

    @classmethod
    def from_index(cls, index: int, n: int) -> "ActionProfile":
        if not 0 <= index < (1 << n):
            raise ValueError(f"index {index} out of range for n={n}")
        return cls(tuple((index >> i) & 1 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @property
    def subset(self) -> frozenset[int]:
        return frozenset(i for i, b in enumerate(self.bits) if b)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __contains__(self, receiver: int) -> bool:
        return 0 <= receiver < len(self.bits) and self.bits[receiver] == 1

    def size(self) -> int:
        return sum(self.bits)

    def with_bit(self, receiver: int, value: int) -> "ActionProfile":
        bits = list(self.bits)
        bits[receiver] = int(value)
        return ActionProfile(tuple(bits))


def all_profiles(n: int) -> list[ActionProfile]:
    """All 2^n profiles in table-index order."""
    return [ActionProfile.from_index(k, n) for k in range(1 << n)]


def subset_index(subset: Iterable[int]) -> int:
    return sum(1 << i for i in set(subset))
