"""Set universes: the power set of ``{1..n}`` and the ring of interval unions in ``[0, 1)``."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .ddf import DDFError, as_number


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of half-open intervals ``[a, b)`` inside ``[0, 1)``.

    Stored canonically: sorted, pairwise disjoint, non-adjacent, non-empty pieces.
    """

    pieces: tuple = ()

    def __post_init__(self):
        raw = []
        for a, b in self.pieces:
            a, b = as_number(a), as_number(b)
            if not 0 <= a <= b <= 1:
                raise DDFError(f"interval [{a}, {b}) is not inside [0, 1)")
            if a < b:
                raw.append((a, b))
        raw.sort()
        merged: list = []
        for a, b in raw:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "pieces", tuple(merged))

    @classmethod
    def of(cls, *pieces) -> "IntervalSet":
        return cls(tuple(pieces))

    @property
    def length(self):
        return sum((b - a for a, b in self.pieces), Fraction(0))

    def __bool__(self) -> bool:
        return bool(self.pieces)

    def __or__(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.pieces + other.pieces)

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.pieces:
            for c, d in other.pieces:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalSet(tuple(out))

    def __sub__(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.pieces:
            cur = a
            for c, d in other.pieces:
                if d <= cur or c >= b:
                    continue
                if c > cur:
                    out.append((cur, c))
                cur = max(cur, d)
            if cur < b:
                out.append((cur, b))
        return IntervalSet(tuple(out))

    def __le__(self, other: "IntervalSet") -> bool:
        return not (self - other)

    def isdisjoint(self, other: "IntervalSet") -> bool:
        return not (self & other)

    def __contains__(self, x) -> bool:
        return any(a <= x < b for a, b in self.pieces)

    def __repr__(self) -> str:
        inner = " ∪ ".join(f"[{a}, {b})" for a, b in self.pieces)
        return f"IntervalSet({inner or '∅'})"


class Universe:
    kind: str

    def empty(self):
        raise NotImplementedError

    def full(self):
        raise NotImplementedError

    def contains(self, E) -> bool:
        raise NotImplementedError

    def check(self, E):
        if not self.contains(E):
            raise DDFError(f"set {E!r} is not in the {self.kind} universe")
        return E


@dataclass(frozen=True)
class Finite(Universe):
    """Power set of ``{1, ..., n}``; sets are frozensets of elements."""

    n: int
    kind = "finite"

    def empty(self) -> frozenset:
        return frozenset()

    def full(self) -> frozenset:
        return frozenset(range(1, self.n + 1))

    def contains(self, E) -> bool:
        return isinstance(E, frozenset) and E <= self.full()

    def all_sets(self) -> Iterator[frozenset]:
        elems = range(1, self.n + 1)
        for r in range(self.n + 1):
            for c in itertools.combinations(elems, r):
                yield frozenset(c)

    def from_mask(self, mask: int) -> frozenset:
        return frozenset(i + 1 for i in range(self.n) if mask >> i & 1)

    def random_set(self, rng: random.Random) -> frozenset:
        return frozenset(i for i in range(1, self.n + 1) if rng.random() < 0.5)

    def parse(self, raw) -> frozenset:
        if isinstance(raw, int) and not isinstance(raw, bool):
            return self.check(self.from_mask(raw))
        return self.check(frozenset(int(v) for v in raw))


@dataclass(frozen=True)
class Intervals(Universe):
    """Ring of finite unions of half-open intervals in ``[0, 1)``."""

    kind = "intervals"

    def empty(self) -> IntervalSet:
        return IntervalSet()

    def full(self) -> IntervalSet:
        return IntervalSet.of((0, 1))

    def contains(self, E) -> bool:
        return isinstance(E, IntervalSet)

    def random_set(self, rng: random.Random, denom: int = 16, max_pieces: int = 3) -> IntervalSet:
        k = rng.randint(0, max_pieces)
        cuts = sorted(rng.sample(range(denom + 1), 2 * k))
        return IntervalSet(tuple((Fraction(cuts[2 * i], denom), Fraction(cuts[2 * i + 1], denom)) for i in range(k)))

    def parse(self, raw) -> IntervalSet:
        return IntervalSet(tuple((a, b) for a, b in raw))


def parse_universe(spec: dict) -> Universe:
    kind = spec.get("kind")
    if kind == "finite":
        n = int(spec["n"])
        if n < 0:
            raise DDFError("finite universe needs n >= 0")
        return Finite(n)
    if kind == "intervals":
        return Intervals()
    raise DDFError(f"unknown universe kind {kind!r}")


def disjoint_union(sets: Iterable):
    sets = list(sets)
    acc = sets[0]
    for s in sets[1:]:
        acc = acc | s
    return acc
