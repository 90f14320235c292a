"""Brute-force reference implementations.

These are intentionally naive: literal grid scans of the defining formulas,
sharing nothing with the optimised routes beyond DDF evaluation. They are the
yardstick the exact routes are tested against.

Resolution convention: ``n`` is the number of grid cells per unit of
abscissa, so the tolerance band ``2/n`` does not depend on ``x_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import LOp, TNorm, tau_apply_info
from .ddf import DDF, DDFError, INF, Knot, agree, evaluate_array
from .measures import PMeasure, measure_eval
from .sets import Finite

MAX_EXHAUSTIVE_N = 5


@dataclass(frozen=True)
class GridPlan:
    n: int = 1024
    x_max: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 16:
            raise DDFError(f"grid resolution must be >= 16, got {self.n}")
        if not (0 < self.x_max < INF):
            raise DDFError(f"x_max must be positive and finite, got {self.x_max}")

    @classmethod
    def covering(cls, *bodies: DDF, n: int = 1024, L: LOp | None = None, seed: int = 0) -> "GridPlan":
        """Smallest plan whose abscissa range holds every finite knot (and their L-combination)."""
        tops = [float(max((k.x for k in F.knots if k.x != INF), default=0)) for F in bodies]
        x = max(tops, default=0.0)
        if L is not None and len(tops) == 2:
            x = max(x, float(L(tops[0], tops[1])))
        return cls(n, max(x, 1.0) + 4.0 / n, seed)


def brute_tau(L: LOp, T: TNorm, G: DDF, H: DDF, plan: GridPlan) -> DDF:
    """Grid scan of ``sup_{L(u,v)=x} T(G(u), H(v))`` returning a pointwise lower bound.

    The output at grid node ``x_k`` is held on ``(x_k, x_{k+1}]``, which
    undershoots the true non-decreasing sup.
    """
    cells = int(math.ceil(plan.x_max * plan.n))
    xs = np.arange(cells + 1) / plan.n
    us = np.arange(2 * cells + 1) / (2 * plan.n)
    g_u = evaluate_array(G, us)
    h_u = evaluate_array(H, us) if (L.is_sum or L.is_max) else None
    vals = np.zeros(cells + 1)
    chunk = max(1, 1_000_000 // len(us))
    for lo in range(0, cells + 1, chunk):
        ks = np.arange(lo, min(lo + chunk, cells + 1))
        width = 2 * ks[-1] + 1  # u never exceeds x
        j = np.arange(width)[None, :]
        ok = j <= 2 * ks[:, None]
        if h_u is not None:
            # v = x - u (or v = x for max) stays on the half grid: gather instead of re-evaluating
            v_idx = 2 * ks[:, None] - j if L.is_sum else np.broadcast_to(2 * ks[:, None], ok.shape)
            h_v = h_u[np.where(ok, v_idx, 0)]
        else:
            u = np.broadcast_to(us[None, :width], ok.shape)
            v = L.solve_array(xs[ks][:, None], np.minimum(u, xs[ks][:, None]))
            h_v = evaluate_array(H, v.ravel()).reshape(v.shape)
        t = np.where(ok, T(np.broadcast_to(g_u[:width], ok.shape), h_v), 0.0)
        vals[ks] = t.max(axis=1)
    vals = np.maximum.accumulate(vals)
    knots = [Knot(0.0, 0.0, float(vals[0]))]
    for k in range(1, cells + 1):
        if vals[k] > vals[k - 1]:
            knots.append(Knot(float(xs[k]), float(vals[k - 1]), float(vals[k])))
    return DDF(tuple(knots))


def _finite_span(F: DDF, G: DDF) -> float:
    return float(max((k.x for k in F.knots + G.knots if k.x != INF), default=0.0))


def _sibley_ok(F: DDF, G: DDF, h: float, step: float, span: float) -> bool:
    hi = min(1.0 / h, span + h + step)
    xs = np.arange(1, int(hi / step) + 1) * step
    xs = np.append(xs[xs <= 1.0 / h], min(1.0 / h, hi))
    for A, B in ((F, G), (G, F)):
        a_lo = np.where(xs - h > 0, evaluate_array(A, np.maximum(xs - h, 0.0)), 0.0)
        a_hi = evaluate_array(A, xs + h)
        b = evaluate_array(B, xs)
        if np.any(a_lo - h > b + 1e-12) or np.any(b > a_hi + h + 1e-12):
            return False
    return True


def brute_sibley(F: DDF, G: DDF, plan: GridPlan) -> float:
    """Smallest ``h`` on the grid ``k/n`` for which the envelope predicate holds on an x-grid of step ``1/(4n)``."""
    n = plan.n
    span = _finite_span(F, G)
    step = 1.0 / (4 * n)
    lo, hi = 0, n
    if _sibley_ok(F, G, 1.0 / (16 * n), step / 4, span):
        return 0.0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _sibley_ok(F, G, mid / n, step, span):
            hi = mid
        else:
            lo = mid
    return hi / n


@dataclass
class ExhaustiveReport:
    pairs: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def exhaustive_measure_check(gamma: PMeasure) -> ExhaustiveReport:
    """Check ``tau(g(E|F), g(E&F)) == tau(g(E), g(F))`` on every pair of a small finite universe."""
    U = gamma.universe
    if not isinstance(U, Finite):
        raise DDFError("exhaustive check needs a finite universe")
    if U.n > MAX_EXHAUSTIVE_N:
        raise DDFError(f"exhaustive check is limited to n <= {MAX_EXHAUSTIVE_N}, got {U.n}")
    sets = [U.from_mask(m) for m in range(2**U.n)]
    vals = {E: measure_eval(gamma, E) for E in sets}
    rep = ExhaustiveReport()
    for E in sets:
        for F in sets:
            rep.pairs += 1
            lhs, i1 = tau_apply_info(gamma.tau, vals[E | F], vals[E & F])
            rhs, i2 = tau_apply_info(gamma.tau, vals[E], vals[F])
            if not agree(lhs, rhs, max(i1.gap_bound, i2.gap_bound)):
                rep.failures.append((sorted(E), sorted(F)))
    return rep
