"""T-norms, pseudo-additions and triangle functions on distance distribution functions.

Three families of triangle functions are supported:

* ``tau_lt(L, T)`` -- sup-convolution ``sup_{L(u,v)=x} T(G(u), H(v))``;
* ``pi_top(T)``    -- pointwise ``T(G(x), H(x))`` for a left-continuous t-norm;
* ``convolution()`` -- the distribution of the sum of independent variables.

Every application picks a route (exact step formula, quantile arithmetic,
pointwise merge, grid sup, discrete convolution) and reports it in a
:class:`RouteInfo`.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .ddf import (
    DDF,
    DDFError,
    INF,
    Knot,
    Order,
    agree,
    as_number,
    compare,
    evaluate,
    evaluate_array,
    evaluate_right,
    point_mass,
    pointwise,
    quantile,
    scalar_mul,
    sibley,
    step,
)

EPS0 = point_mass(0)
DEFAULT_RESOLUTION = 1024


# -- t-norms ------------------------------------------------------------------


def _drastic(x, y):
    if x == 1:
        return y
    if y == 1:
        return x
    return 0 * x


@dataclass(frozen=True)
class TNorm:
    """A t-norm; ``fn`` must accept scalars and numpy arrays alike."""

    name: str
    fn: Callable = field(compare=False, repr=False)
    left_continuous: bool = True
    continuous: bool = True

    def __call__(self, x, y):
        return self.fn(x, y)

    @classmethod
    def custom(cls, fn, name="custom", left_continuous=True, continuous=False):
        return cls(name, fn, left_continuous, continuous)


M = TNorm("M", lambda x, y: np.minimum(x, y) if isinstance(x, np.ndarray) else min(x, y))
PI = TNorm("Pi", lambda x, y: x * y)
W = TNorm(
    "W",
    lambda x, y: np.maximum(x + y - 1, 0) if isinstance(x, np.ndarray) else max(x + y - 1, 0 * x),
)
D = TNorm(
    "D",
    lambda x, y: (np.where(x == 1, y, np.where(y == 1, x, 0.0)) if isinstance(x, np.ndarray) else _drastic(x, y)),
    left_continuous=False,
    continuous=False,
)
TNORMS = {"M": M, "Pi": PI, "W": W, "D": D}


def tnorm_eval(T: TNorm, x, y):
    x, y = as_number(x), as_number(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DDFError(f"t-norm arguments must lie in [0, 1], got ({x}, {y})")
    return T(x, y)


# -- pseudo-additions ---------------------------------------------------------


@dataclass(frozen=True)
class LOp:
    """Power-mean pseudo-addition ``K_alpha``; ``alpha = inf`` gives ``max``."""

    alpha: object = Fraction(1)

    def __post_init__(self):
        a = as_number(self.alpha)
        if not a > 0:
            raise DDFError(f"K_alpha needs alpha > 0, got {a}")
        object.__setattr__(self, "alpha", a)

    @property
    def name(self) -> str:
        return "K_inf" if self.alpha == INF else f"K_{self.alpha}"

    @property
    def is_sum(self) -> bool:
        return self.alpha == 1

    @property
    def is_max(self) -> bool:
        return self.alpha == INF

    def __call__(self, u, v):
        if u == 0:
            return v
        if v == 0:
            return u
        if u == INF or v == INF:
            return INF
        if self.is_sum:
            return u + v
        if self.is_max:
            return max(u, v)
        a = float(self.alpha)
        return (float(u) ** a + float(v) ** a) ** (1.0 / a)

    def solve(self, x, u):
        """The ``v`` with ``L(u, v) = x`` (canonical choice ``x`` for max), or None."""
        if u > x:
            return None
        if u == 0:
            return x
        if x == INF:
            return INF
        if self.is_sum:
            return x - u
        if self.is_max:
            return x
        a = float(self.alpha)
        return max(float(x) ** a - float(u) ** a, 0.0) ** (1.0 / a)

    def array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.is_sum:
            return u + v
        if self.is_max:
            return np.maximum(u, v)
        a = float(self.alpha)
        return (u**a + v**a) ** (1.0 / a)

    def solve_array(self, x: float, u: np.ndarray) -> np.ndarray:
        """Vectorised ``solve`` for ``u <= x``."""
        if self.is_sum:
            return x - u
        if self.is_max:
            return np.full_like(u, x)
        a = float(self.alpha)
        return np.maximum(x**a - u**a, 0.0) ** (1.0 / a)


def K(alpha=1) -> LOp:
    return LOp(as_number(alpha))


K1 = K(1)
K_INF = K(INF)


def lop_eval(L: LOp, u, v):
    u, v = as_number(u), as_number(v)
    if u < 0 or v < 0:
        raise DDFError("L-operation arguments must be non-negative")
    return L(u, v)


def lop_solve(L: LOp, x, u):
    x, u = as_number(x), as_number(u)
    if x < 0 or u < 0:
        raise DDFError("L-operation arguments must be non-negative")
    return L.solve(x, u)


# -- triangle functions -------------------------------------------------------


@dataclass(frozen=True)
class RouteInfo:
    route: str
    exact: bool
    resolution: Optional[int] = None
    gap_bound: float = 0.0


@dataclass(frozen=True)
class TriangleOp:
    kind: str  # "tauLT" | "piTop" | "convolution"
    L: Optional[LOp] = None
    T: Optional[TNorm] = None
    resolution: int = DEFAULT_RESOLUTION
    distributive: bool = False

    def __post_init__(self):
        if self.kind == "tauLT":
            if self.L is None or self.T is None:
                raise DDFError("tauLT needs both L and T")
        elif self.kind == "piTop":
            if self.T is None:
                raise DDFError("piTop needs a t-norm")
            if not self.T.left_continuous:
                raise DDFError(f"piTop requires a left-continuous t-norm; {self.T.name} is not")
        elif self.kind != "convolution":
            raise DDFError(f"unknown triangle function kind {self.kind!r}")
        if self.resolution < 16:
            raise DDFError("resolution must be at least 16")

    @property
    def name(self) -> str:
        if self.kind == "tauLT":
            return f"tau[{self.L.name},{self.T.name}]"
        if self.kind == "piTop":
            return f"Pi[{self.T.name}]"
        return "convolution"

    @property
    def exactness(self) -> str:
        if self.kind == "tauLT" and self.T.name == "M" and (self.L.is_sum or self.L.is_max):
            return "exact_on_piecewise"
        if self.kind == "piTop" and self.T.name in ("M", "W"):
            return "exact_on_piecewise"
        return "exact_on_steps"

    def exact_on(self, *bodies: DDF) -> bool:
        return self.exactness == "exact_on_piecewise" or all(b.is_step for b in bodies)

    def __call__(self, G: DDF, H: DDF) -> DDF:
        return tau_apply(self, G, H)


def tau_lt(L: LOp, T: TNorm, resolution: int = DEFAULT_RESOLUTION) -> TriangleOp:
    return TriangleOp("tauLT", L=L, T=T, resolution=resolution)


def pi_top(T: TNorm, resolution: int = DEFAULT_RESOLUTION) -> TriangleOp:
    return TriangleOp("piTop", T=T, resolution=resolution)


def convolution(resolution: int = DEFAULT_RESOLUTION) -> TriangleOp:
    return TriangleOp("convolution", resolution=resolution)


def tau_apply(tau: TriangleOp, G: DDF, H: DDF) -> DDF:
    return tau_apply_info(tau, G, H)[0]


def tau_apply_info(tau: TriangleOp, G: DDF, H: DDF) -> tuple[DDF, RouteInfo]:
    if G == EPS0:
        return H, RouteInfo("identity", True)
    if H == EPS0:
        return G, RouteInfo("identity", True)
    both_steps = G.is_step and H.is_step
    if tau.kind == "tauLT":
        if both_steps:
            return _step_sup(tau.L, tau.T, G, H), RouteInfo("step", True)
        if tau.T.name == "M":
            exact = tau.L.is_sum or tau.L.is_max
            res = None if exact else tau.resolution
            return _quantile_sum(tau.L, G, H, None if exact else tau.resolution), RouteInfo(
                "quantile", exact, res
            )
        return _grid_sup(tau.L, tau.T, G, H, tau.resolution)
    if tau.kind == "piTop":
        return _pointwise_t(tau.T, G, H, tau.resolution)
    if both_steps:
        return _convolve_steps(G, H), RouteInfo("convolution", True)
    return _convolve_grid(G, H, tau.resolution)


# route (a): sup over lower corners for step bodies


def _breaks(F: DDF) -> list[tuple]:
    return [(Fraction(0), Fraction(0))] + [(k.x, k.p_right) for k in F.knots]


def _from_running_max(cands: list[tuple]) -> DDF:
    """Step DDF whose value just above ``b`` is the max of the values at candidates ``<= b``."""
    cands.sort(key=lambda c: c[0])
    knots = []
    cur = Fraction(0)
    i = 0
    while i < len(cands):
        b = cands[i][0]
        best = cur
        while i < len(cands) and cands[i][0] == b:
            if cands[i][1] > best:
                best = cands[i][1]
            i += 1
        if best > cur and b != INF:
            knots.append(Knot(b, cur, best))
            cur = best
    return DDF(tuple(knots))


def _step_sup(L: LOp, T: TNorm, G: DDF, H: DDF) -> DDF:
    cands = []
    for g, v in _breaks(G):
        for h, w in _breaks(H):
            t = T(v, w)
            if t > 0:
                cands.append((L(g, h), t))
    return _from_running_max(cands)


# route (b): quantile arithmetic for the minimum t-norm


def _graph(F: DDF) -> tuple[list, list]:
    """Completed graph of F as monotone vertex lists (xs, ps), starting at (0, 0)."""
    xs, ps = [Fraction(0)], [Fraction(0)]
    for k in F.knots:
        for p in (k.p_left, k.p_right):
            if xs[-1] != k.x or ps[-1] != p:
                xs.append(k.x)
                ps.append(p)
    return xs, ps


def _graph_lo(xs, ps, p):
    i = bisect.bisect_left(ps, p)
    if ps[i] == p:
        return xs[i]
    x0, x1, p0, p1 = xs[i - 1], xs[i], ps[i - 1], ps[i]
    return x0 + (x1 - x0) * (p - p0) / (p1 - p0)


def _graph_hi(xs, ps, p):
    i = bisect.bisect_right(ps, p) - 1
    if ps[i] == p:
        return xs[i]
    x0, x1, p0, p1 = xs[i], xs[i + 1], ps[i], ps[i + 1]
    return x0 + (x1 - x0) * (p - p0) / (p1 - p0)


def _vertices_to_ddf(verts: list[tuple]) -> DDF:
    knots: list[Knot] = []
    for x, p in verts:
        if knots and knots[-1].x == x:
            k = knots[-1]
            knots[-1] = Knot(x, min(k.p_left, p), max(k.p_right, p))
        else:
            knots.append(Knot(x, p, p))
    return DDF(tuple(knots))


def _quantile_sum(L: LOp, G: DDF, H: DDF, refine: Optional[int]) -> DDF:
    top = min(G.top, H.top)
    if top == 0:
        return DDF(())
    gx, gp = _graph(G)
    hx, hp = _graph(H)
    levels = sorted({p for p in gp + hp if p <= top} | {top})
    if refine:
        fine = set(levels)
        per = max(2, refine // max(1, len(levels)))
        for a, b in zip(levels, levels[1:]):
            fine.update(a + (b - a) * Fraction(j, per) for j in range(1, per))
        levels = sorted(fine)
    verts = []
    prev_hi = None
    for p in levels:
        lo_g, lo_h = _graph_lo(gx, gp, p), _graph_lo(hx, hp, p)
        if L.is_max and prev_hi is not None:
            # max of two affine pieces on (p_prev, p): add the crossing level
            pp, a0, b0 = prev_hi
            d0, d1 = a0 - b0, lo_g - lo_h
            if d0 * d1 < 0:
                t = d0 / (d0 - d1)
                verts.append((a0 + (lo_g - a0) * t, pp + (p - pp) * t))
        verts.append((L(lo_g, lo_h), p))
        if p < top:
            hi_g, hi_h = _graph_hi(gx, gp, p), _graph_hi(hx, hp, p)
            verts.append((L(hi_g, hi_h), p))
            prev_hi = (p, hi_g, hi_h)
    return _vertices_to_ddf(verts)


# route (c): grid sup for general t-norms


def _upper_x(F: DDF):
    q = quantile(F, 1 - Fraction(1, 10**9), "minus")
    if q == INF:
        q = F.knots[-1].x if F.knots else Fraction(0)
    return q


def _grid_sup(L: LOp, T: TNorm, G: DDF, H: DDF, n: int) -> tuple[DDF, RouteInfo]:
    x_max = float(L(_upper_x(G), _upper_x(H))) or 1.0
    grid = np.linspace(0.0, x_max, n + 1)
    g_vals = evaluate_array(G, grid)
    best = np.zeros_like(grid)
    for k in range(1, n + 1):
        u = grid[: k + 1]
        v = L.solve_array(grid[k], u)
        best[k] = np.max(T(g_vals[: k + 1], evaluate_array(H, v)))
    best = np.maximum.accumulate(best)
    knots = [Knot(float(grid[0]), 0.0, float(best[0]))]
    for k in range(1, n + 1):
        if best[k] > best[k - 1]:
            knots.append(Knot(float(grid[k]), float(best[k - 1]), float(best[k])))
    spacing = x_max / n
    return DDF(tuple(knots)), RouteInfo("grid_sup", False, n, 2 * spacing)


# route (d): pointwise t-norm


def _pointwise_t(T: TNorm, G: DDF, H: DDF, n: int) -> tuple[DDF, RouteInfo]:
    if T.name == "M":
        return pointwise(G, H, min, kink=lambda g, h: g - h), RouteInfo("pointwise", True)
    if T.name == "W":
        return pointwise(G, H, T, kink=lambda g, h: g + h - 1), RouteInfo("pointwise", True)
    if G.is_step and H.is_step:
        return pointwise(G, H, T), RouteInfo("pointwise", True)
    xs = sorted(set(G.xs) | set(H.xs))
    per = max(4, n // max(1, len(xs)))
    fine = set(xs)
    for a, b in zip(xs, xs[1:]):
        fine.update(a + (b - a) * Fraction(j, per) if isinstance(a, Fraction) and isinstance(b, Fraction)
                    else a + (b - a) * j / per for j in range(1, per))
    knots = [Knot(x, T(evaluate(G, x), evaluate(H, x)), T(evaluate_right(G, x), evaluate_right(H, x)))
             for x in sorted(fine)]
    width = max((b - a for a, b in zip(xs, xs[1:])), default=0)
    return DDF(tuple(knots)), RouteInfo("pointwise_refined", False, n, float(width) / per)


# route (e): convolution


def _atoms(F: DDF) -> list[tuple]:
    return [(k.x, k.p_right - k.p_left) for k in F.knots if k.p_right > k.p_left]


def _convolve_steps(G: DDF, H: DDF) -> DDF:
    masses: dict = {}
    for x, m in _atoms(G):
        for y, w in _atoms(H):
            masses[x + y] = masses.get(x + y, 0) + m * w
    knots = []
    acc = Fraction(0)
    for loc in sorted(masses):
        knots.append(Knot(loc, acc, acc + masses[loc]))
        acc += masses[loc]
    return DDF(tuple(knots))


def _grid_masses(F: DDF, grid: np.ndarray, upper: bool) -> np.ndarray:
    """Masses on grid nodes: ``upper`` shifts each cell's mass to its left node."""
    if upper:
        cdf = evaluate_array(F, grid)  # mass in [g_k, g_k+1) moves to g_k
        nxt = np.append(cdf[1:], float(F.top))
        return nxt - cdf
    cdf = evaluate_array(F, grid, right=True)  # mass in (g_k-1, g_k] moves to g_k
    return np.diff(np.concatenate(([0.0], cdf)))


def _cdf_from_masses(grid: np.ndarray, m: np.ndarray) -> DDF:
    cum = np.cumsum(m)
    knots = []
    prev = 0.0
    for x, c in zip(grid, cum):
        c = min(float(c), 1.0)
        if c > prev:
            knots.append(Knot(float(x), prev, c))
            prev = c
    return DDF(tuple(knots))


def _convolve_grid(G: DDF, H: DDF, n: int) -> tuple[DDF, RouteInfo]:
    x_max = float(max(_upper_x(G), _upper_x(H))) or 1.0
    s = x_max / n
    grid = np.arange(n + 1) * s
    out = np.arange(2 * n + 1) * s
    lower = _cdf_from_masses(out, np.convolve(_grid_masses(G, grid, False), _grid_masses(H, grid, False)))
    upper = _cdf_from_masses(out, np.convolve(_grid_masses(G, grid, True), _grid_masses(H, grid, True)))
    gap = sibley(lower, upper, tol=1e-6)
    return lower, RouteInfo("convolution_grid", False, n, gap)


# -- folds --------------------------------------------------------------------


def oplus_fold(tau: TriangleOp, bodies: Sequence[DDF]) -> DDF:
    """Right fold ``tau(G1, tau(G2, ... Gn))``; the empty sum is the unit mass at 0."""
    bodies = list(bodies)
    if not bodies:
        return EPS0
    acc = bodies[-1]
    for b in reversed(bodies[:-1]):
        acc = tau_apply(tau, b, acc)
    return acc


# -- axiom checks -------------------------------------------------------------


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 0
    count: int = 12
    include_piecewise: Optional[bool] = None


@dataclass
class AxiomReport:
    op: TriangleOp
    results: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    @property
    def distributive(self) -> bool:
        return self.results.get("distributivity", False)

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'} {self.op.name} {name}" for name, ok in self.results.items()]


def random_step(rng: random.Random, max_atoms: int = 3, span: int = 8, denom: int = 4) -> DDF:
    """Random exact step body with dyadic atom locations in ``[0, span/denom]``."""
    k = rng.randint(1, max_atoms)
    locs = rng.sample(range(span + 1), k)
    weights = [rng.randint(1, 4) for _ in range(k)]
    tot = sum(weights)
    return step([(Fraction(l, denom), Fraction(w, tot)) for l, w in zip(locs, weights)])


def random_piecewise(rng: random.Random, max_knots: int = 4, span: int = 8, denom: int = 4) -> DDF:
    """Random exact body mixing linear ramps and jumps."""
    k = rng.randint(2, max_knots)
    xs = sorted(rng.sample(range(span + 1), k))
    levels = sorted(Fraction(rng.randint(0, 8), 8) for _ in range(2 * k - 2))
    vals = [Fraction(0)] + levels + [Fraction(1)]
    knots = [Knot(Fraction(x, denom), vals[2 * i], vals[2 * i + 1]) for i, x in enumerate(xs)]
    return DDF(tuple(knots))


def _bound(tau: TriangleOp, bodies) -> float:
    if tau.exact_on(*bodies):
        return 0.0
    return max(tau_apply_info(tau, a, b)[1].gap_bound for a in bodies for b in bodies) * 3 + 4.0 / tau.resolution


def check_axioms(tau: TriangleOp, plan: SamplePlan = SamplePlan()) -> AxiomReport:
    """Sampled check of the triangle-function axioms plus distributivity over the scalar action."""
    rng = random.Random(plan.seed)
    piecewise_ok = plan.include_piecewise
    if piecewise_ok is None:
        piecewise_ok = tau.exactness == "exact_on_piecewise"

    def body():
        if piecewise_ok and rng.random() < 0.5:
            return random_piecewise(rng)
        return random_step(rng)

    rep = AxiomReport(tau)
    checks = {k: True for k in ("symmetry", "associativity", "monotonicity", "identity", "distributivity")}
    for i in range(plan.count):
        G, H, J = body(), body(), body()
        tol = _bound(tau, (G, H, J))
        if not agree(tau(G, H), tau(H, G), tol):
            checks["symmetry"] = False
            rep.failures.append(("symmetry", i))
        if not agree(tau(tau(G, H), J), tau(G, tau(H, J)), tol):
            checks["associativity"] = False
            rep.failures.append(("associativity", i))
        G2 = pointwise(G, J, max, kink=lambda g, h: g - h)  # G2 >= G
        if tol == 0 and compare(tau(G, H), tau(G2, H)) not in (Order.LE, Order.EQ):
            checks["monotonicity"] = False
            rep.failures.append(("monotonicity", i))
        if tau(EPS0, G) != G or tau(G, EPS0) != G:
            checks["identity"] = False
            rep.failures.append(("identity", i))
        c = Fraction(rng.randint(1, 12), 4)
        lhs = scalar_mul(c, tau(G, H))
        rhs = tau(scalar_mul(c, G), scalar_mul(c, H))
        if not agree(lhs, rhs, tol * max(1, float(c))):
            checks["distributivity"] = False
            rep.failures.append(("distributivity", i))
    rep.results = checks
    return rep


def verified(tau: TriangleOp, plan: SamplePlan = SamplePlan()) -> TriangleOp:
    """Return ``tau`` with its distributivity flag set, after a passing axiom check."""
    if tau.distributive:
        return tau
    rep = check_axioms(tau, plan)
    if not rep.passed:
        raise DDFError(f"{tau.name} failed axiom checks: {rep.failures}")
    return replace(tau, distributive=True)


def tau_from_spec(spec: dict) -> TriangleOp:
    """Parse ``{"kind": "tauLT", "L": {"kind": "K", "alpha": 1}, "T": "M"}`` and friends."""
    kind = spec.get("kind")
    res = int(spec.get("resolution", DEFAULT_RESOLUTION))
    if kind == "tauLT":
        Ls = spec["L"]
        alpha = Ls.get("alpha", 1) if isinstance(Ls, dict) else Ls
        if isinstance(Ls, dict) and Ls.get("kind") == "Kinf":
            alpha = INF
        return tau_lt(K(alpha), _tnorm(spec["T"]), res)
    if kind == "piTop":
        return pi_top(_tnorm(spec["T"]), res)
    if kind == "convolution":
        return convolution(res)
    raise DDFError(f"unknown triangle function kind {kind!r}")


def _tnorm(name) -> TNorm:
    try:
        return TNORMS[name]
    except KeyError as exc:
        raise DDFError(f"unknown t-norm {name!r}") from exc
