"""The gamma-integral of non-negative functions against decomposable measures."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .algebra import EPS0, K1, M, TriangleOp, tau_apply_info, tau_lt, verified
from .ddf import (
    DDF,
    DDFError,
    INF,
    Knot,
    Order,
    agree,
    as_number,
    compare,
    epsilon_inf,
    quantile,
    scalar_mul,
    sibley,
    uniform,
)
from .measures import PMeasure, gamma_a, length, measure_eval, singleton_generated
from .sets import Finite, Intervals, IntervalSet, Universe

DEFAULT_DEPTH = 12
MAX_DEPTH = 20
LIMIT_TOL = 1e-2


@functools.cache
def tau_m() -> TriangleOp:
    """``tau_{K_1, M}`` with its distributivity verified once per process."""
    return verified(tau_lt(K1, M))


# -- simple functions ---------------------------------------------------------


@dataclass(frozen=True)
class SimpleFunction:
    """``sum x_i * chi_{E_i}`` over pairwise disjoint sets of one universe."""

    universe: Universe
    pieces: tuple = ()

    def __post_init__(self):
        clean = []
        for E, x in self.pieces:
            self.universe.check(E)
            x = as_number(x)
            if not (0 <= x < INF):
                raise DDFError(f"simple function values must be finite and >= 0, got {x}")
            clean.append((E, x))
        _require_disjoint([E for E, _ in clean])
        object.__setattr__(self, "pieces", tuple(clean))

    @classmethod
    def chi(cls, universe: Universe, F, x=1) -> "SimpleFunction":
        return cls(universe, ((F, x),))

    @classmethod
    def zero(cls, universe: Universe) -> "SimpleFunction":
        return cls(universe, ())

    def canonical(self) -> "SimpleFunction":
        by_value: dict = {}
        for E, x in self.pieces:
            if x == 0 or not E:
                continue
            by_value[x] = by_value[x] | E if x in by_value else E
        return SimpleFunction(self.universe, tuple((E, x) for x, E in sorted(by_value.items())))

    def same_function(self, other: "SimpleFunction") -> bool:
        return self.canonical() == other.canonical()

    @property
    def support(self):
        acc = self.universe.empty()
        for E, x in self.pieces:
            if x != 0:
                acc = acc | E
        return acc

    def value_at(self, point):
        for E, x in self.pieces:
            if point in E:
                return x
        return Fraction(0)

    def scale(self, c) -> "SimpleFunction":
        c = as_number(c)
        return SimpleFunction(self.universe, tuple((E, c * x) for E, x in self.pieces))

    def restrict(self, F) -> "SimpleFunction":
        """``f * chi_F``."""
        return SimpleFunction(self.universe, tuple((E & F, x) for E, x in self.pieces if E & F))

    def cells(self, other: "SimpleFunction") -> list[tuple]:
        """Common refinement: ``(set, f value, g value)`` over the union of supports."""
        out = []
        rest_other = [(B, y) for B, y in other.pieces]
        covered = self.universe.empty()
        for A, x in self.pieces:
            left = A
            for B, y in rest_other:
                both = A & B
                if both:
                    out.append((both, x, y))
                    left = left - B
            if left:
                out.append((left, x, Fraction(0)))
            covered = covered | A
        for B, y in rest_other:
            only = B - covered
            if only:
                out.append((only, Fraction(0), y))
        return out

    def combine(self, other: "SimpleFunction", op) -> "SimpleFunction":
        return SimpleFunction(self.universe, tuple((E, op(x, y)) for E, x, y in self.cells(other)))

    def __add__(self, other: "SimpleFunction") -> "SimpleFunction":
        return self.combine(other, lambda x, y: x + y)

    def __mul__(self, other: "SimpleFunction") -> "SimpleFunction":
        return self.combine(other, lambda x, y: x * y)

    def __le__(self, other: "SimpleFunction") -> bool:
        return all(x <= y for _, x, y in self.cells(other))

    def refine(self, parts: int = 2) -> "SimpleFunction":
        """Same function, each finite piece split into up to ``parts`` pieces."""
        out = []
        for E, x in self.pieces:
            chunks = _split(E, parts)
            out.extend((C, x) for C in chunks)
        return SimpleFunction(self.universe, tuple(out))


def _require_disjoint(sets: list):
    if all(isinstance(E, IntervalSet) for E in sets):
        spans = sorted(p for E in sets for p in E.pieces)
        bad = next(((a, b) for a, b in zip(spans, spans[1:]) if b[0] < a[1]), None)
    else:
        seen: set = set()
        bad = None
        for E in sets:
            if seen & E:
                bad = (sorted(seen & E),)
                break
            seen |= E
    if bad is not None:
        raise DDFError(f"simple function pieces overlap at {bad}")


def _split(E, parts: int) -> list:
    if isinstance(E, IntervalSet):
        out = []
        for a, b in E.pieces:
            cuts = [a + (b - a) * Fraction(i, parts) if isinstance(a + b, Fraction) else a + (b - a) * i / parts
                    for i in range(parts + 1)]
            out.extend(IntervalSet.of((c, d)) for c, d in zip(cuts, cuts[1:]))
        return out
    elems = sorted(E)
    if not elems:
        return [E]
    size = max(1, math.ceil(len(elems) / parts))
    return [frozenset(elems[i : i + size]) for i in range(0, len(elems), size)]


# -- measurable functions -----------------------------------------------------


@dataclass(frozen=True)
class Builtin:
    """Increasing closed-form integrands on ``[0, 1)``: powers ``x**k`` and positive multiples of them."""

    name: str
    k: int = 1
    c: Any = 1
    inner: Optional["Builtin"] = None

    def __post_init__(self):
        if self.name not in ("identity", "power", "scaled"):
            raise DDFError(f"unknown builtin integrand {self.name!r}")
        if self.name == "power" and (not isinstance(self.k, int) or self.k < 1):
            raise DDFError("power needs a positive integer exponent")
        if self.name == "scaled":
            c = as_number(self.c)
            if not (0 < c < INF) or self.inner is None:
                raise DDFError("scaled needs a positive finite factor and an inner builtin")
            object.__setattr__(self, "c", c)

    def __call__(self, x):
        if self.name == "identity":
            return x
        if self.name == "power":
            return x**self.k
        return self.c * self.inner(x)

    @property
    def sup(self):
        """Supremum over ``[0, 1)`` (approached at 1)."""
        return self.c * self.inner.sup if self.name == "scaled" else Fraction(1)

    def inverse(self, t):
        """Smallest ``x >= 0`` with ``self(x) >= t``; exact when the root is rational."""
        if self.name == "identity":
            return t
        if self.name == "scaled":
            return self.inner.inverse(t / self.c)
        return _kth_root(t, self.k)


def _kth_root(t, k: int):
    t = Fraction(t)
    p, q = _int_root(t.numerator, k), _int_root(t.denominator, k)
    if p is not None and q is not None:
        return Fraction(p, q)
    return float(t) ** (1.0 / k)


def _int_root(n: int, k: int):
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == n:
            return c
    return None


@dataclass(frozen=True)
class MeasurableFunction:
    kind: str
    simple: Optional[SimpleFunction] = None
    builtin: Optional[Builtin] = None
    inf_set: Any = None
    finite: Optional["MeasurableFunction"] = None

    @classmethod
    def of_simple(cls, f: SimpleFunction) -> "MeasurableFunction":
        return cls("simple", simple=f)

    @classmethod
    def of_builtin(cls, b: Builtin) -> "MeasurableFunction":
        return cls("builtin", builtin=b)

    @classmethod
    def extended(cls, inf_set, finite: "MeasurableFunction") -> "MeasurableFunction":
        if finite.kind == "extended":
            raise DDFError("the finite part of an extended function must itself be finite")
        return cls("extended", inf_set=inf_set, finite=finite)


def identity() -> MeasurableFunction:
    return MeasurableFunction.of_builtin(Builtin("identity"))


def power(k: int) -> MeasurableFunction:
    return MeasurableFunction.of_builtin(Builtin("power", k=k))


def scaled(c, inner: MeasurableFunction) -> MeasurableFunction:
    return MeasurableFunction.of_builtin(Builtin("scaled", c=c, inner=inner.builtin))


def staircase(b: Builtin, n: int) -> SimpleFunction:
    """Dyadic staircase ``min(n, floor(2**n f) / 2**n)`` of a builtin on ``[0, 1)``."""
    scale = 2**n
    top = n * scale
    last = min(top, math.ceil(b.sup * scale))
    cuts = [b.inverse(Fraction(j, scale)) for j in range(1, last + 1)]
    pieces = []
    for j in range(1, last + 1):
        lo = cuts[j - 1]
        hi = cuts[j] if j < last else 1
        if j == top:
            hi = 1
        if lo < 1 and lo < hi:
            pieces.append((IntervalSet.of((lo, min(hi, 1))), Fraction(j, scale)))
    return SimpleFunction(Intervals(), tuple(pieces))


# -- integration --------------------------------------------------------------


def _check_tau(gamma: PMeasure):
    if not gamma.tau.distributive:
        raise DDFError(f"{gamma.tau.name} is not verified distributive; the integral is undefined")


def _fold(tau: TriangleOp, bodies: list[DDF]) -> tuple[DDF, bool, float]:
    """Right fold matching ``oplus_fold`` that also tracks route exactness."""
    if not bodies:
        return EPS0, True, 0.0
    acc, exact, bound = bodies[-1], True, 0.0
    for b in reversed(bodies[:-1]):
        acc, info = tau_apply_info(tau, b, acc)
        exact = exact and info.exact
        bound += info.gap_bound
    return acc, exact, bound


def _simple_terms(f: SimpleFunction, gamma: PMeasure, E) -> list[DDF]:
    return [scalar_mul(x, measure_eval(gamma, E & Ei)) for Ei, x in f.pieces]


def integrate_simple(f: SimpleFunction, gamma: PMeasure, E) -> DDF:
    """``(+)_i x_i (.) gamma(E & E_i)`` folded over the pieces as given."""
    _check_tau(gamma)
    gamma.universe.check(E)
    return _fold(gamma.tau, _simple_terms(f, gamma, E))[0]


@dataclass
class IntegralResult:
    value: DDF
    depth: int = 0
    gaps: list = field(default_factory=list)
    exact: bool = True
    warnings: list = field(default_factory=list)
    partials: list = field(default_factory=list)

    def diagnostics(self) -> dict:
        return {
            "depth": self.depth,
            "gaps": [float(g) for g in self.gaps],
            "exact": self.exact,
            "warnings": list(self.warnings),
        }


def integrate(f: MeasurableFunction, gamma: PMeasure, E, depth: int = DEFAULT_DEPTH, tol: float = LIMIT_TOL) -> IntegralResult:
    """The integral of ``f`` over ``E``; builtins go through the staircase limit.

    ``gaps[k]`` is the Sibley distance between the staircase integrals at
    depths ``k + 1`` and ``k + 2``. A final gap at or above ``tol`` is reported
    as a warning; the depth-limited value is still returned.
    """
    _check_tau(gamma)
    gamma.universe.check(E)
    if not 1 <= depth <= MAX_DEPTH:
        raise DDFError(f"depth must be in [1, {MAX_DEPTH}], got {depth}")
    if f.kind == "simple":
        value, exact, _ = _fold(gamma.tau, _simple_terms(f.simple, gamma, E))
        return IntegralResult(value, 0, [], exact, [], [value])
    if f.kind == "extended":
        hit = gamma.universe.check(f.inf_set) & E
        if measure_eval(gamma, hit) != EPS0:
            return IntegralResult(epsilon_inf(), 0, [], True, [], [])
        return integrate(f.finite, gamma, E, depth, tol)
    if not isinstance(gamma.universe, Intervals):
        raise DDFError("builtin integrands live on the interval universe")
    partials, exact = [], True
    for n in range(1, depth + 1):
        value, ex, _ = _fold(gamma.tau, _simple_terms(staircase(f.builtin, n), gamma, E))
        partials.append(value)
        exact = exact and ex
    gaps = [sibley(a, b) for a, b in zip(partials, partials[1:])]
    warnings = []
    if gaps and gaps[-1] >= tol:
        warnings.append(f"staircase gap {gaps[-1]:.3g} at depth {depth} is not below {tol}")
    return IntegralResult(partials[-1], depth, gaps, exact, warnings, partials)


# -- induced measures ---------------------------------------------------------


@dataclass(frozen=True)
class Induced:
    f: MeasurableFunction
    base: PMeasure
    depth: int = DEFAULT_DEPTH

    def evaluate(self, E, gamma) -> DDF:
        return integrate(self.f, self.base, E, self.depth).value


def induced_measure(f: MeasurableFunction, gamma: PMeasure, depth: int = DEFAULT_DEPTH) -> PMeasure:
    """``nu_E = integral of f over E``."""
    _check_tau(gamma)
    return PMeasure(gamma.universe, gamma.tau, Induced(f, gamma, depth), gamma.mode)


# -- Choquet-like and Moore ---------------------------------------------------


def choquet_like(levels: Sequence, level_sets: Sequence, gamma: PMeasure, E) -> DDF:
    """``(+)_i (a_i - a_{i-1}) (.) gamma(E & E_i)`` for ``0 = a_0 < ... < a_n`` and nested ``E_i``."""
    _check_tau(gamma)
    levels = [as_number(a) for a in levels]
    if not levels or levels[0] != 0:
        raise DDFError("levels must start at a_0 = 0")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DDFError("levels must be strictly increasing")
    if len(level_sets) != len(levels) - 1:
        raise DDFError(f"expected {len(levels) - 1} level sets, got {len(level_sets)}")
    for A, B in zip(level_sets, level_sets[1:]):
        if not B <= A:
            raise DDFError("level sets must be nested decreasing")
    terms = [scalar_mul(b - a, measure_eval(gamma, E & Ei)) for a, b, Ei in zip(levels, levels[1:], level_sets)]
    return _fold(gamma.tau, terms)[0]


def level_data(f: SimpleFunction) -> tuple[list, list]:
    """Levels ``0 = a_0 < a_1 < ...`` and upper level sets ``{f >= a_i}`` of a simple function."""
    g = f.canonical()
    values = sorted({x for _, x in g.pieces})
    levels = [Fraction(0)] + values
    sets = []
    for a in values:
        acc = f.universe.empty()
        for E, x in g.pieces:
            if x >= a:
                acc = acc | E
        sets.append(acc)
    return levels, sets


def choquet_of(f: SimpleFunction, gamma: PMeasure, E) -> DDF:
    levels, sets = level_data(f)
    return choquet_like(levels, sets, gamma, E)


@dataclass
class RefinementReport:
    coarse: DDF
    fine: DDF
    gap: float
    equal: bool


def choquet_refinement(f: SimpleFunction, gamma: PMeasure, E) -> RefinementReport:
    """Compare the level fold on ``f``'s own levels against one with every gap halved."""
    levels, sets = level_data(f)
    coarse = choquet_like(levels, sets, gamma, E)
    fine_levels, fine_sets = [levels[0]], []
    for a, b, S in zip(levels, levels[1:], sets):
        fine_levels += [(a + b) / 2, b]
        fine_sets += [S, S]
    fine = choquet_like(fine_levels, fine_sets, gamma, E)
    return RefinementReport(coarse, fine, sibley(coarse, fine), agree(coarse, fine))


def moore_utility(scores: Sequence, intervals: Sequence) -> DDF:
    """Probabilistic weighted mean of interval-valued ratings.

    Element ``i`` carries the uniform body on ``[a_i, b_i]``; the scores are
    integrated under ``tau_{K_1, M}``.
    """
    scores = [as_number(x) for x in scores]
    ivs = [(as_number(a), as_number(b)) for a, b in intervals]
    if not scores:
        raise DDFError("moore utility needs at least one score")
    if len(scores) != len(ivs):
        raise DDFError(f"{len(scores)} scores but {len(ivs)} intervals")
    for x in scores:
        if not 0 <= x <= 1:
            raise DDFError(f"scores must lie in [0, 1], got {x}")
    U = Finite(len(scores))
    gamma = singleton_generated(U, tau_m(), [uniform(a, b) for a, b in ivs])
    f = SimpleFunction(U, tuple((frozenset({i + 1}), x) for i, x in enumerate(scores)))
    return integrate_simple(f, gamma, U.full())


# -- probes and a.e. machinery ------------------------------------------------


@dataclass
class LinearityReport:
    sum_integral: DDF
    oplus_integral: DDF
    order: Order
    gap: float
    expects_equality: bool

    @property
    def equal(self) -> bool:
        return self.order is Order.EQ

    @property
    def ok(self) -> bool:
        return self.equal or not self.expects_equality


def probe_linearity(f: SimpleFunction, g: SimpleFunction, gamma: PMeasure, E) -> LinearityReport:
    """``I(f + g)`` against ``I(f) (+) I(g)``; equality is expected only under ``tau_{K_1, M}``."""
    lhs = integrate_simple(f + g, gamma, E)
    rhs = gamma.tau(integrate_simple(f, gamma, E), integrate_simple(g, gamma, E))
    t = gamma.tau
    expects = t.kind == "tauLT" and t.L.is_sum and t.T.name == "M"
    return LinearityReport(lhs, rhs, compare(lhs, rhs), sibley(lhs, rhs), expects)


def disagreement(f: MeasurableFunction, g: MeasurableFunction, universe: Universe):
    """The set ``{f != g}``, when it is representable."""
    if f == g:
        return universe.empty()
    if f.kind == "simple" and g.kind == "simple":
        acc = universe.empty()
        for E, x, y in f.simple.cells(g.simple):
            if x != y:
                acc = acc | E
        return acc
    for a, b in ((f, g), (g, f)):
        if a.kind == "extended" and a.finite == b:
            return a.inf_set
    if f.kind == "extended" and g.kind == "extended" and f.finite == g.finite:
        return (f.inf_set - g.inf_set) | (g.inf_set - f.inf_set)
    raise DDFError("the set where these functions differ is not representable in the universe")


def ae_equal(f: MeasurableFunction, g: MeasurableFunction, gamma: PMeasure, E) -> bool:
    D = disagreement(f, g, gamma.universe) & E
    return measure_eval(gamma, D) == EPS0


@dataclass
class TripleReport:
    f_dnu_g: DDF
    g_dnu_f: DDF
    fg_dgamma: DDF
    orders: dict
    gaps: dict

    @property
    def all_equal(self) -> bool:
        return all(o is Order.EQ for o in self.orders.values())


def probe_product(f: SimpleFunction, g: SimpleFunction, gamma: PMeasure, E) -> TripleReport:
    """Compare the integral of ``f`` against ``nu^g``, of ``g`` against ``nu^f`` and of ``f g`` against ``gamma``."""
    nu_g = induced_measure(MeasurableFunction.of_simple(g), gamma)
    nu_f = induced_measure(MeasurableFunction.of_simple(f), gamma)
    a = integrate_simple(f, nu_g, E)
    b = integrate_simple(g, nu_f, E)
    c = integrate_simple(f * g, gamma, E)
    vals = {"f_dnu_g": a, "g_dnu_f": b, "fg_dgamma": c}
    pairs = [("f_dnu_g", "g_dnu_f"), ("f_dnu_g", "fg_dgamma"), ("g_dnu_f", "fg_dgamma")]
    orders = {f"{p}|{q}": compare(vals[p], vals[q]) for p, q in pairs}
    gaps = {f"{p}|{q}": sibley(vals[p], vals[q]) for p, q in pairs}
    return TripleReport(a, b, c, orders, gaps)


# -- layered example ----------------------------------------------------------


def layered_closed_form(x0, E: IntervalSet, parts: Sequence[tuple]) -> DDF:
    """Step body with value ``a_i`` on ``(r_{i-1}, r_i]`` and 1 beyond.

    ``parts`` are ``(E_i, a_i)`` with non-decreasing ``a_i``; the breakpoints
    are ``r_i = sum_{k <= i} x0 * length(E & E_k)``.
    """
    x0 = as_number(x0)
    levels = [as_number(a) for _, a in parts]
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise DDFError("levels a_i must be non-decreasing")
    layers = [(a, x0 * (E & Ei).length) for (Ei, _), a in zip(parts, levels)]
    layers = [(a, w) for a, w in layers if w > 0]  # empty layers are invisible
    if not layers:
        return EPS0
    knots, r, prev = [Knot(Fraction(0), Fraction(0), layers[0][0])], Fraction(0), layers[0][0]
    for a, w in layers:
        if a > prev:
            knots.append(Knot(r, prev, a))
            prev = a
        r += w
    if prev < 1:
        knots.append(Knot(r, prev, Fraction(1)))
    return DDF(tuple(knots))


def layered_integral(x0, E: IntervalSet, parts: Sequence[tuple]) -> DDF:
    """``(+)_i`` of the integral of ``x0 * chi_E`` over ``E_i`` against ``gamma^{a_i}``, under ``tau_{K_1, M}``."""
    tau = tau_m()
    U = Intervals()
    f = SimpleFunction.chi(U, E, x0)
    sets = [Ei for Ei, _ in parts]
    for i, A in enumerate(sets):
        for B in sets[i + 1 :]:
            if not A.isdisjoint(B):
                raise DDFError("the sets E_i must be pairwise disjoint")
    terms = [integrate_simple(f, gamma_a(U, tau, length, a), Ei) for Ei, a in parts]
    return _fold(tau, terms)[0]


def level_decomposition(H: DDF) -> list[tuple]:
    """Levels ``a`` at which ``H`` is flat on a non-degenerate interval, with ``(H_a^-, H_a^+)``."""
    out = []
    for a in sorted({k.p_right for k in H.knots} | {k.p_left for k in H.knots}):
        lo, hi = quantile(H, a, "minus"), quantile(H, a, "plus")
        if lo < hi and a > 0:
            out.append((a, lo, hi))
    return out


# -- JSON ---------------------------------------------------------------------


def builtin_from_spec(spec: dict) -> Builtin:
    inner = builtin_from_spec(spec["inner"]) if "inner" in spec else None
    return Builtin(spec["name"], k=int(spec.get("k", 1)), c=spec.get("c", 1), inner=inner)


def function_from_spec(spec: dict, universe: Universe) -> MeasurableFunction:
    kind = spec.get("kind")
    if kind == "simple":
        pieces = tuple((universe.parse(s), v) for s, v in spec["pieces"])
        return MeasurableFunction.of_simple(SimpleFunction(universe, pieces))
    if kind == "builtin":
        return MeasurableFunction.of_builtin(builtin_from_spec(spec))
    if kind == "extended":
        return MeasurableFunction.extended(universe.parse(spec["inf_set"]), function_from_spec(spec["finite"], universe))
    raise DDFError(f"unknown function kind {kind!r}")
