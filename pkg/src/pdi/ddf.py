"""Distance distribution functions stored as piecewise-linear knot lists.

A DDF is left-continuous, non-decreasing, zero on ``(-inf, 0]`` and reaches 1
at ``+inf``.  It is stored as a sorted tuple of knots ``(x, p_left, p_right)``:
at ``x`` the function takes ``p_left`` (its left limit) and immediately
above ``x`` it takes ``p_right``.  Between knots it is linear, before the first
knot it is 0 and after the last knot it stays at the last ``p_right``.  Any
shortfall of the last ``p_right`` below 1 is mass sitting at ``+inf``.

Knot coordinates are kept as :class:`fractions.Fraction` whenever the inputs
are rational, so that scaling, folding and comparisons are exact.  Floats are
accepted and propagate where irrational operations (power means, grids) are
involved.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, NamedTuple, Sequence

import numpy as np

INF = math.inf

__all__ = [
    "DDF",
    "DDFError",
    "Knot",
    "Order",
    "INF",
    "as_number",
    "point_mass",
    "step",
    "uniform",
    "lam",
    "piecewise",
    "epsilon_inf",
    "make_ddf",
    "evaluate",
    "evaluate_right",
    "evaluate_array",
    "quantile",
    "scalar_mul",
    "sibley",
    "left_reg_inf",
    "pointwise",
    "compare",
    "agree",
    "to_csv",
    "from_csv",
]


class DDFError(ValueError):
    """Raised when a descriptor or knot list violates a DDF invariant."""


class Knot(NamedTuple):
    x: object
    p_left: object
    p_right: object


class Order(enum.Enum):
    EQ = "EQ"
    LE = "LE"
    GE = "GE"
    INCOMPARABLE = "INCOMPARABLE"


def as_number(v):
    """Normalise a user value: ints and decimal strings become Fractions.

    Floats are kept as floats (they are not silently rationalised), ``"inf"``
    and ``math.inf`` become ``math.inf``.
    """
    if isinstance(v, bool):
        raise DDFError(f"expected a number, got {v!r}")
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, float):
        if math.isnan(v):
            raise DDFError("NaN is not a valid coordinate")
        return v
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        try:
            return Fraction(s)
        except ValueError as exc:
            raise DDFError(f"cannot parse number {v!r}") from exc
    if isinstance(v, (np.floating, np.integer)):
        return as_number(v.item())
    raise DDFError(f"expected a number, got {v!r}")


def _is_exact(v) -> bool:
    return isinstance(v, (Fraction, int))


def _collinear(x0, p0, x1, p1, x2, p2) -> bool:
    return (p1 - p0) * (x2 - x1) == (p2 - p1) * (x1 - x0)


def _canonical(knots: list[Knot]) -> tuple[Knot, ...]:
    out: list[Knot] = []
    n = len(knots)
    for i, k in enumerate(knots):
        if k.p_left != k.p_right:
            out.append(k)
            continue
        p = k.p_left
        nxt = knots[i + 1] if i + 1 < n else None
        if out:
            prev = out[-1]
            if nxt is None:
                removable = prev.p_right == p
            else:
                removable = _collinear(prev.x, prev.p_right, k.x, p, nxt.x, nxt.p_left)
        else:
            # flat zero region on the left
            removable = p == 0 and (nxt is None or nxt.p_left == 0)
        if not removable:
            out.append(k)
    return tuple(out)


@dataclass(frozen=True)
class DDF:
    """An immutable, canonical distance distribution function."""

    knots: tuple[Knot, ...] = ()

    def __post_init__(self):
        raw = [Knot(as_number(k[0]), as_number(k[1]), as_number(k[2])) for k in self.knots]
        _validate(raw)
        object.__setattr__(self, "knots", _canonical(raw))
        object.__setattr__(self, "_xs", [k.x for k in self.knots])

    @property
    def top(self):
        """Value reached at every finite x beyond the last knot."""
        return self.knots[-1].p_right if self.knots else Fraction(0)

    @property
    def mass_at_infinity(self):
        return 1 - self.top

    @property
    def is_step(self) -> bool:
        ks = self.knots
        return all(ks[i].p_right == ks[i + 1].p_left for i in range(len(ks) - 1))

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(v) for k in self.knots for v in k)

    @property
    def xs(self) -> list:
        return self._xs

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self) -> str:
        body = ", ".join(f"({_fmt(k.x)}, {_fmt(k.p_left)}, {_fmt(k.p_right)})" for k in self.knots)
        return f"DDF([{body}])"


def _fmt(v) -> str:
    return str(v) if isinstance(v, Fraction) else repr(v)


def _validate(knots: Sequence[Knot]) -> None:
    prev = None
    for k in knots:
        if not (isinstance(k.x, (Fraction, float)) and 0 <= k.x < INF):
            raise DDFError(f"support: knot abscissa {k.x!r} must be finite and >= 0")
        if not (0 <= k.p_left <= k.p_right <= 1):
            raise DDFError(
                f"monotone: knot at x={k.x} needs 0 <= p_left <= p_right <= 1, "
                f"got ({k.p_left}, {k.p_right})"
            )
        if prev is None:
            if k.p_left != 0:
                raise DDFError(
                    f"left-continuity: first knot at x={k.x} must have p_left = 0, got {k.p_left}"
                )
        else:
            if not k.x > prev.x:
                raise DDFError(f"canonical form: knot abscissae must be strictly increasing ({prev.x}, {k.x})")
            if k.p_left < prev.p_right:
                raise DDFError(f"monotone: value decreases between x={prev.x} and x={k.x}")
        prev = k


# -- constructors -------------------------------------------------------------


def epsilon_inf() -> DDF:
    return DDF(())


def point_mass(a) -> DDF:
    """The indicator body that jumps from 0 to 1 just after ``a``."""
    a = as_number(a)
    if a == INF:
        return epsilon_inf()
    if a < 0:
        raise DDFError(f"support: point mass location {a} must be >= 0")
    return DDF((Knot(a, 0, 1),))


def step(atoms: Iterable[tuple]) -> DDF:
    """Distribution of finitely many atoms ``(location, mass)``; total mass 1."""
    masses: dict = {}
    total = Fraction(0)
    for loc, mass in atoms:
        loc, mass = as_number(loc), as_number(mass)
        if loc < 0:
            raise DDFError(f"support: atom location {loc} must be >= 0")
        if not mass > 0:
            raise DDFError(f"monotone: atom mass {mass} must be > 0")
        masses[loc] = masses.get(loc, 0) + mass
        total += mass
    if not _unit_total(total):
        raise DDFError(f"normalization: atom masses sum to {total}, expected 1")
    knots = []
    acc = Fraction(0)
    for loc in sorted(m for m in masses if m != INF):
        new = min(acc + masses[loc], Fraction(1))
        knots.append(Knot(loc, acc, new))
        acc = new
    if INF not in masses and knots and not _is_exact(acc):
        # snap the float total so no phantom mass is left at infinity
        knots[-1] = Knot(knots[-1].x, knots[-1].p_left, Fraction(1))
    return DDF(tuple(knots))


def _unit_total(total) -> bool:
    if _is_exact(total):
        return total == 1
    return abs(total - 1) <= 1e-12


def uniform(a, b) -> DDF:
    """Uniform distribution on ``[a, b]`` (a point mass when ``a == b``)."""
    a, b = as_number(a), as_number(b)
    if not 0 <= a <= b < INF:
        raise DDFError(f"support: uniform needs 0 <= a <= b < inf, got ({a}, {b})")
    if a == b:
        return point_mass(a)
    return DDF((Knot(a, 0, 0), Knot(b, 1, 1)))


def lam(a) -> DDF:
    """The two-level body: ``a`` on ``(0, 1]`` and 1 beyond."""
    a = as_number(a)
    if not 0 <= a <= 1:
        raise DDFError(f"range: level {a} must lie in [0, 1]")
    return DDF((Knot(Fraction(0), 0, a), Knot(Fraction(1), a, 1)))


def piecewise(knots: Iterable[Sequence], mass_at_infinity=None) -> DDF:
    raw = sorted((tuple(k) for k in knots), key=lambda k: as_number(k[0]))
    F = DDF(tuple(Knot(*k) for k in raw))
    if mass_at_infinity is not None:
        m = as_number(mass_at_infinity)
        if not _unit_total(F.top + m):
            raise DDFError(
                f"normalization: last p_right {F.top} + mass_at_infinity {m} != 1"
            )
    return F


_KINDS = {
    "point_mass": lambda d: point_mass(d["a"]),
    "step": lambda d: step(d["atoms"]),
    "uniform": lambda d: uniform(d["a"], d["b"]),
    "lambda": lambda d: lam(d["a"]),
    "piecewise": lambda d: piecewise(d["knots"], d.get("mass_at_infinity")),
}


def make_ddf(spec) -> DDF:
    """Build a DDF from a JSON-style descriptor (see the README for the schema)."""
    if isinstance(spec, DDF):
        return spec
    try:
        kind = spec["type"]
    except (KeyError, TypeError) as exc:
        raise DDFError("descriptor needs a 'type' field") from exc
    if kind not in _KINDS:
        raise DDFError(f"unknown descriptor type {kind!r}")
    try:
        return _KINDS[kind](spec)
    except KeyError as exc:
        raise DDFError(f"descriptor {kind!r} is missing field {exc.args[0]!r}") from exc


# -- evaluation ---------------------------------------------------------------


def evaluate(F: DDF, x):
    """Left-continuous value ``F(x)``."""
    if x == INF:
        return Fraction(1)
    if x <= 0:
        return Fraction(0)
    ks = F.knots
    i = bisect.bisect_left(F.xs, x)
    if i < len(ks) and ks[i].x == x:
        return ks[i].p_left
    if i == 0:
        return Fraction(0)
    if i == len(ks):
        return ks[-1].p_right
    a, b = ks[i - 1], ks[i]
    if a.p_right == b.p_left:
        return a.p_right
    return a.p_right + (b.p_left - a.p_right) * (x - a.x) / (b.x - a.x)


def evaluate_right(F: DDF, x):
    """Right limit ``F(x+)``."""
    if x == INF:
        return Fraction(1)
    if x < 0:
        return Fraction(0)
    ks = F.knots
    i = bisect.bisect_left(F.xs, x)
    if i < len(ks) and ks[i].x == x:
        return ks[i].p_right
    return evaluate(F, x) if x > 0 else Fraction(0)


def evaluate_array(F: DDF, xs: np.ndarray, right: bool = False) -> np.ndarray:
    """Vectorised float evaluation (left values, or right limits)."""
    xs = np.asarray(xs, dtype=float)
    if not F.knots:
        return np.where(np.isposinf(xs), 1.0, 0.0)
    kx = np.array([float(k.x) for k in F.knots])
    pl = np.array([float(k.p_left) for k in F.knots])
    pr = np.array([float(k.p_right) for k in F.knots])
    # segment i spans (kx[i], kx[i+1]] from pr[i] to pl[i+1]
    seg_x0 = kx[:-1]
    seg_x1 = kx[1:]
    idx = np.searchsorted(kx, xs, side="left")  # first knot >= x
    out = np.zeros_like(xs)
    after = idx >= len(kx)
    out[after] = pr[-1]
    inner = (idx > 0) & ~after
    j = idx[inner] - 1
    x = xs[inner]
    w = (x - seg_x0[j]) / (seg_x1[j] - seg_x0[j])
    out[inner] = pr[j] + (pl[j + 1] - pr[j]) * w
    at = np.zeros_like(xs, dtype=bool)
    ok = idx < len(kx)
    at[ok] = kx[idx[ok]] == xs[ok]
    out[at] = (pr if right else pl)[idx[at]]
    out[xs <= 0] = 0.0
    if right:
        out[(xs == 0) & at] = pr[0] if kx[0] == 0 else 0.0
    out[np.isposinf(xs)] = 1.0
    return out


def quantile(F: DDF, a, side: str = "minus"):
    """Generalised inverse.

    ``minus``: ``inf{x >= 0 : a <= F(x)}`` (``+inf`` when empty).
    ``plus``:  ``sup{x : F(x) <= a}`` (``+inf`` when ``a`` is at or above the
    top value, 0 when the set is empty).
    """
    if side == "minus":
        return _q_minus(F, a)
    if side == "plus":
        return _q_plus(F, a)
    raise DDFError(f"side must be 'minus' or 'plus', got {side!r}")


def _q_minus(F: DDF, a):
    if a <= 0:
        return Fraction(0)
    prev = None
    for k in F.knots:
        if k.p_left >= a and prev is not None:
            v0, v1 = prev.p_right, k.p_left
            return prev.x + (a - v0) * (k.x - prev.x) / (v1 - v0)
        if k.p_right >= a:
            return k.x
        prev = k
    return INF


def _q_plus(F: DDF, a):
    if a < 0:
        return Fraction(0)
    if a >= F.top:
        return INF
    prev = None
    for k in F.knots:
        if k.p_left > a and prev is not None:
            v0, v1 = prev.p_right, k.p_left
            return prev.x + (a - v0) * (k.x - prev.x) / (v1 - v0)
        if k.p_right > a:
            return k.x
        prev = k
    return INF  # unreachable: a < top


# -- algebra on the x-axis ---------------------------------------------------


def scalar_mul(c, F: DDF) -> DDF:
    """``(c ⊙ F)(x) = F(x / c)``; ``0 ⊙ F`` is the unit mass at 0, ``inf ⊙ F`` sits at infinity."""
    c = as_number(c)
    if c < 0:
        raise DDFError(f"scalar must be >= 0, got {c}")
    if c == 0:
        return point_mass(0)
    if c == INF:
        return epsilon_inf()
    return DDF(tuple(Knot(k.x * c, k.p_left, k.p_right) for k in F.knots))


# -- Sibley metric ------------------------------------------------------------


def _sibley_holds(F: DDF, G: DDF, h: float) -> bool:
    """Check ``F(x-h) - h <= G(x) <= F(x+h) + h`` on ``(0, 1/h]``."""
    hi = 1.0 / h
    cand = {0.0, hi}
    for k in F.knots:
        cand.add(float(k.x) + h)
        cand.add(float(k.x) - h)
    for k in G.knots:
        cand.add(float(k.x))
    xs = np.array(sorted(c for c in cand if 0.0 <= c <= hi))
    interior = xs[xs > 0]
    g_l = evaluate_array(G, interior)
    lo_shift = evaluate_array(F, interior - h)
    hi_shift = evaluate_array(F, interior + h)
    if np.any(lo_shift - h > g_l + 1e-15) or np.any(g_l > hi_shift + h + 1e-15):
        return False
    opening = xs[xs < hi]
    g_r = evaluate_array(G, opening, right=True)
    lo_r = evaluate_array(F, opening - h, right=True)
    hi_r = evaluate_array(F, opening + h, right=True)
    return not (np.any(lo_r - h > g_r + 1e-15) or np.any(g_r > hi_r + h + 1e-15))


def sibley(F: DDF, G: DDF, tol: float = 1e-9) -> float:
    """Sibley (modified Lévy) distance, bisected to within ``tol``."""
    if not tol > 0:
        raise DDFError(f"tol must be positive, got {tol}")
    if F == G:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _sibley_holds(F, G, mid) and _sibley_holds(G, F, mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- pointwise lattice operations --------------------------------------------


def _crossing(x0, x1, d0, d1):
    return x0 + d0 * (x1 - x0) / (d0 - d1)


def pointwise(G: DDF, H: DDF, fn, kink=None) -> DDF:
    """Combine two DDFs pointwise through ``fn(g, h)``.

    ``fn`` must map pairs of linear pieces to piecewise-linear pieces whose only
    kinks are the zero crossings of ``kink(g, h)`` (also linear on a segment).
    """
    xs = sorted(set(G.xs) | set(H.xs))
    knots: list[Knot] = []
    for i, x in enumerate(xs):
        gl, gr = evaluate(G, x), evaluate_right(G, x)
        hl, hr = evaluate(H, x), evaluate_right(H, x)
        knots.append(Knot(x, fn(gl, hl), fn(gr, hr)))
        if kink is None or i + 1 == len(xs):
            continue
        nx = xs[i + 1]
        d0 = kink(gr, hr)
        d1 = kink(evaluate(G, nx), evaluate(H, nx))
        if d0 * d1 < 0:
            t = _crossing(x, nx, d0, d1)
            if x < t < nx:
                v = fn(evaluate(G, t), evaluate(H, t))
                knots.append(Knot(t, v, v))
    return DDF(tuple(knots))


def _min_all(family: Sequence[DDF]) -> DDF:
    acc = family[0]
    for F in family[1:]:
        acc = pointwise(acc, F, min, kink=lambda g, h: g - h)
    return acc


def left_reg_inf(family: Sequence[DDF]) -> DDF:
    """Infimum in ``(Δ+, <=)``: pointwise minimum, then left-limit regularisation.

    Knots store left limits as values, so the regularisation is built in: the
    value at each merged abscissa is the minimum of the left limits.
    """
    family = list(family)
    if not family:
        raise DDFError("left_reg_inf needs a non-empty family")
    return _min_all(family)


def compare(F: DDF, G: DDF) -> Order:
    if F == G:
        return Order.EQ
    le = ge = True
    xs = sorted(set(F.xs) | set(G.xs))
    for x in xs:
        for f, g in ((evaluate(F, x), evaluate(G, x)), (evaluate_right(F, x), evaluate_right(G, x))):
            if f < g:
                ge = False
            elif f > g:
                le = False
    if le and ge:
        return Order.EQ
    if le:
        return Order.LE
    if ge:
        return Order.GE
    return Order.INCOMPARABLE


def agree(F: DDF, G: DDF, tol: float = 0.0) -> bool:
    """Equality test used by the checkers.

    Exact bodies must match canonically.  When either side carries floats the
    bodies may differ by rounding, so a Sibley gap of at most ``max(tol, 1e-9)``
    is accepted; ``tol`` also widens the band for grid-approximated results.
    """
    if F == G:
        return True
    if tol == 0 and F.is_exact and G.is_exact:
        return False
    band = max(tol, 1e-9)
    return sibley(F, G, tol=min(band / 10, 1e-9)) <= band


# -- canonical CSV ------------------------------------------------------------


def _csv_num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def to_csv(F: DDF) -> str:
    lines = ["x,p_left,p_right"]
    for k in F.knots:
        lines.append(f"{_csv_num(k.x)},{_csv_num(k.p_left)},{_csv_num(k.p_right)}")
    lines.append(f"# mass_at_infinity={_csv_num(F.mass_at_infinity)}")
    return "\n".join(lines) + "\n"


def _parse_csv_num(s: str):
    # floats are written with repr (always '.', 'e' or 'inf'); Fractions as p/q
    s = s.strip()
    if any(c in s.lower() for c in ".ei"):
        return float(s)
    return Fraction(s)


def from_csv(text: str) -> DDF:
    knots = []
    mass = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("x,"):
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "mass_at_infinity":
                mass = _parse_csv_num(val)
            continue
        x, pl, pr = (_parse_csv_num(s) for s in line.split(","))
        knots.append((x, pl, pr))
    return piecewise(knots, mass)
