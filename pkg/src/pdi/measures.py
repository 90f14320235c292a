"""Probabilistic-valued decomposable measures over finite universes and interval rings."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from .algebra import EPS0, K1, LOp, TriangleOp, tau_apply_info, oplus_fold, tau_from_spec, verified
from .ddf import (
    DDF,
    DDFError,
    Order,
    agree,
    as_number,
    compare,
    lam,
    make_ddf,
    point_mass,
    scalar_mul,
    sibley,
)
from .sets import Finite, Intervals, IntervalSet, Universe, parse_universe

CHAIN_DEPTH = 16
CHAIN_TOL = 1e-2


@dataclass(frozen=True)
class NumericalMeasure:
    """A finite numerical measure, additive or ``L``-decomposable.

    ``counting`` and ``weighted`` live on finite universes (the weighted kind
    reads ``weights[i - 1]`` for element ``i``); ``length`` is Lebesgue
    length on the interval ring and is always additive.
    """

    kind: str
    weights: tuple = ()
    L: LOp = K1

    def __post_init__(self):
        if self.kind not in ("counting", "length", "weighted"):
            raise DDFError(f"unknown numerical measure kind {self.kind!r}")
        if self.kind == "length" and not self.L.is_sum:
            raise DDFError("length is additive; it cannot carry a non-additive L")
        ws = tuple(as_number(w) for w in self.weights)
        if any(w < 0 for w in ws):
            raise DDFError("weights must be non-negative")
        object.__setattr__(self, "weights", ws)

    def __call__(self, E):
        if self.kind == "length":
            return E.length
        vals = [Fraction(1) if self.kind == "counting" else self.weights[i - 1] for i in sorted(E)]
        acc = Fraction(0)
        for v in vals:
            acc = self.L(acc, v)
        return acc


counting = NumericalMeasure("counting")
length = NumericalMeasure("length")


def weighted(weights, L: LOp = K1) -> NumericalMeasure:
    return NumericalMeasure("weighted", tuple(weights), L)


# -- sources ------------------------------------------------------------------


@dataclass(frozen=True)
class SingletonGenerated:
    bodies: tuple

    def evaluate(self, E, gamma: "PMeasure") -> DDF:
        return oplus_fold(gamma.tau, [self.bodies[i - 1] for i in sorted(E)])


@dataclass(frozen=True)
class EpsilonOf:
    m: NumericalMeasure

    def evaluate(self, E, gamma) -> DDF:
        return point_mass(self.m(E))


@dataclass(frozen=True)
class ScaledBody:
    m: NumericalMeasure
    phi: DDF

    def evaluate(self, E, gamma) -> DDF:
        return scalar_mul(self.m(E), self.phi)


@dataclass(frozen=True)
class GammaA:
    m: NumericalMeasure
    a: Any

    def evaluate(self, E, gamma) -> DDF:
        return scalar_mul(self.m(E), lam(self.a))


@dataclass(frozen=True, eq=False)
class Tabulated:
    table: Mapping

    def evaluate(self, E, gamma) -> DDF:
        try:
            return self.table[E]
        except KeyError as exc:
            raise DDFError(f"tabulated measure has no entry for {E!r}") from exc


@dataclass(frozen=True)
class Scaled:
    c: Any
    inner: "PMeasure"

    def evaluate(self, E, gamma) -> DDF:
        return scalar_mul(self.c, measure_eval(self.inner, E))


@dataclass(frozen=True)
class Summed:
    first: "PMeasure"
    second: "PMeasure"

    def evaluate(self, E, gamma) -> DDF:
        return gamma.tau(measure_eval(self.first, E), measure_eval(self.second, E))


@dataclass(frozen=True)
class PMeasure:
    """A DDF-valued set function decomposable with respect to ``tau``."""

    universe: Universe
    tau: TriangleOp
    source: Any
    mode: str = "measure"

    def __post_init__(self):
        if not self.tau.distributive:
            raise DDFError(
                f"{self.tau.name} has no verified distributivity; pass it through algebra.verified() first"
            )
        if self.mode not in ("measure", "submeasure"):
            raise DDFError(f"mode must be 'measure' or 'submeasure', got {self.mode!r}")
        if isinstance(self.source, SingletonGenerated):
            if not isinstance(self.universe, Finite) or len(self.source.bodies) != self.universe.n:
                raise DDFError("singleton_generated needs one body per element of a finite universe")

    def __call__(self, E) -> DDF:
        return measure_eval(self, E)


def measure_eval(gamma: PMeasure, E) -> DDF:
    gamma.universe.check(E)
    if not E:
        return EPS0
    return gamma.source.evaluate(E, gamma)


# -- constructors -------------------------------------------------------------


def singleton_generated(universe: Finite, tau: TriangleOp, bodies: Sequence[DDF], mode="measure") -> PMeasure:
    return PMeasure(universe, tau, SingletonGenerated(tuple(bodies)), mode)


def epsilon_of(universe: Universe, tau: TriangleOp, m: NumericalMeasure, mode="measure") -> PMeasure:
    return PMeasure(universe, tau, EpsilonOf(m), mode)


def scaled_body(universe: Universe, tau: TriangleOp, m: NumericalMeasure, phi: DDF, mode="measure") -> PMeasure:
    return PMeasure(universe, tau, ScaledBody(m, phi), mode)


def gamma_a(universe: Universe, tau: TriangleOp, m: NumericalMeasure, a, mode="measure") -> PMeasure:
    a = as_number(a)
    if not 0 <= a <= 1:
        raise DDFError(f"gamma_a level must lie in [0, 1], got {a}")
    return PMeasure(universe, tau, GammaA(m, a), mode)


def tabulated(universe: Universe, tau: TriangleOp, table: Mapping, mode="measure") -> PMeasure:
    return PMeasure(universe, tau, Tabulated(dict(table)), mode)


def combine(left, right: PMeasure) -> PMeasure:
    """``combine(c, gamma)`` is ``c ⊙ gamma``; ``combine(g1, g2)`` is ``g1 ⊕ g2`` setwise."""
    if isinstance(left, PMeasure):
        if left.universe != right.universe or left.tau != right.tau:
            raise DDFError("combined measures must share universe and triangle function")
        return PMeasure(right.universe, right.tau, Summed(left, right), right.mode)
    c = as_number(left)
    if c < 0:
        raise DDFError("scalar must be >= 0")
    return PMeasure(right.universe, right.tau, Scaled(c, right), right.mode)


# -- checks -------------------------------------------------------------------


@dataclass
class MeasureReport:
    results: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    chain_gaps: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    def fail(self, check: str, *where):
        self.results[check] = False
        self.failures.append((check,) + where)

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in self.results.items()]


class _Evaluator:
    """Memoises set evaluations for the duration of one check."""

    def __init__(self, gamma: PMeasure):
        self.gamma = gamma
        self.memo: dict = {}

    def __call__(self, E) -> DDF:
        if E not in self.memo:
            self.memo[E] = measure_eval(self.gamma, E)
        return self.memo[E]

    def oplus(self, a: DDF, b: DDF) -> tuple[DDF, float]:
        out, info = tau_apply_info(self.gamma.tau, a, b)
        return out, info.gap_bound


def _ge(a: DDF, b: DDF, tol: float) -> bool:
    return compare(a, b) in (Order.GE, Order.EQ) or (tol > 0 and agree(a, b, tol)) or (
        not (a.is_exact and b.is_exact) and agree(a, b)
    )


def _pairs(gamma: PMeasure, samples: int, seed: int):
    U = gamma.universe
    if isinstance(U, Finite) and U.n <= 5:
        sets = list(U.all_sets())
        return [(E, F) for E in sets for F in sets]
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        E, F = U.random_set(rng), U.random_set(rng)
        out.append((E, F))
        out.append((E, F - E))  # guarantee disjoint pairs in the sample
    return out


def check_measure(
    gamma: PMeasure,
    samples: int = 60,
    seed: int = 0,
    depth: int = CHAIN_DEPTH,
    chain_tol: float = CHAIN_TOL,
) -> MeasureReport:
    """Run the decomposability checks; finite universes with n <= 5 are enumerated, others sampled."""
    ev = _Evaluator(gamma)
    rep = MeasureReport()
    for name in ("empty", "disjoint_additivity", "union_intersection", "antimonotone", "subadditive"):
        rep.results[name] = True
    if ev(gamma.universe.empty()) != EPS0:
        rep.fail("empty", gamma.universe.empty())
    for E, F in _pairs(gamma, samples, seed):
        gE, gF = ev(E), ev(F)
        sum_EF, bound = ev.oplus(gE, gF)
        union = ev(E | F)
        if E.isdisjoint(F):
            ok = _ge(union, sum_EF, bound) if gamma.mode == "submeasure" else agree(union, sum_EF, bound)
            if not ok:
                rep.fail("disjoint_additivity", E, F)
        if gamma.mode == "measure":
            lhs, b1 = ev.oplus(union, ev(E & F))
            if not agree(lhs, sum_EF, max(bound, b1)):
                rep.fail("union_intersection", E, F)
        if E <= F and not _ge(gE, gF, bound):
            rep.fail("antimonotone", E, F)
        if not _ge(union, sum_EF, bound):
            rep.fail("subadditive", E, F)
    _check_chains(gamma, ev, rep, depth, chain_tol, seed)
    return rep


def interval_chains(depth: int = CHAIN_DEPTH, seed: int = 0) -> list[tuple[list, Any]]:
    """Increasing chains ``E_k`` with their union ``E``."""
    half = IntervalSet.of((0, Fraction(1, 2)))
    chains = [([IntervalSet.of((0, Fraction(1, 2) - Fraction(1, 2**k))) for k in range(1, depth + 1)], half)]
    rng = random.Random(seed)
    for _ in range(2):
        E = Intervals().random_set(rng) | IntervalSet.of((Fraction(3, 4), 1))
        chains.append(([E & IntervalSet.of((0, 1 - Fraction(1, 2**k))) for k in range(1, depth + 1)], E))
    return chains


def _check_chains(gamma, ev, rep, depth, chain_tol, seed):
    rep.results["continuity_from_below"] = True
    if not isinstance(gamma.universe, Intervals):
        return  # finite chains stabilise: continuity is automatic
    for chain, E in interval_chains(depth, seed):
        target = ev(E)
        gaps = [sibley(ev(Ek), target, tol=1e-9) for Ek in chain]
        rep.chain_gaps.append(gaps)
        monotone = all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))
        if not monotone or gaps[-1] >= chain_tol:
            rep.fail("continuity_from_below", E, gaps[-1])


@dataclass
class NullSetReport:
    null_sets: list
    witnesses: dict
    closed_under_union: bool
    closed_under_subsets: bool


def null_sets(gamma: PMeasure, candidates: Optional[Sequence] = None) -> NullSetReport:
    """All sets (finite universe) or all candidates whose measure is the unit mass at 0."""
    U = gamma.universe
    if candidates is None:
        if not isinstance(U, Finite):
            raise DDFError("interval universes need an explicit candidate list")
        candidates = list(U.all_sets())
    witnesses = {E: measure_eval(gamma, E) for E in candidates}
    found = [E for E, v in witnesses.items() if v == EPS0]
    found_set = set(found)
    union_ok = all(measure_eval(gamma, A | B) == EPS0 for A in found for B in found)
    if isinstance(U, Finite):
        subset_ok = all(S in found_set for N in found for S in U.all_sets() if S <= N)
    else:
        subset_ok = all(witnesses[S] == EPS0 for N in found for S in candidates if S <= N)
    return NullSetReport(found, witnesses, union_ok, subset_ok)


# -- JSON ---------------------------------------------------------------------


def numerical_from_spec(spec: dict) -> NumericalMeasure:
    from .algebra import K

    kind = spec.get("kind")
    L = K1
    if "L" in spec:
        Ls = spec["L"]
        L = K("inf" if Ls.get("kind") == "Kinf" else Ls.get("alpha", 1))
    if kind == "weighted":
        return weighted(spec["weights"], L)
    return NumericalMeasure(kind, (), L)


def measure_from_spec(spec: dict) -> PMeasure:
    U = parse_universe(spec["universe"])
    tau = verified(tau_from_spec(spec["tau"]))
    src = spec["source"]
    mode = spec.get("mode", "measure")
    kind = src.get("kind")
    if kind == "singleton_generated":
        return singleton_generated(U, tau, [make_ddf(b) for b in src["bodies"]], mode)
    if kind == "epsilon_of":
        return epsilon_of(U, tau, numerical_from_spec(src["m"]), mode)
    if kind == "scaled_body":
        return scaled_body(U, tau, numerical_from_spec(src["m"]), make_ddf(src["phi"]), mode)
    if kind == "gamma_a":
        return gamma_a(U, tau, numerical_from_spec(src["m"]), src["a"], mode)
    raise DDFError(f"unknown measure source kind {kind!r}")
