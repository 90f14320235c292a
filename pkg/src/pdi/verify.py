"""Seeded invariant suites over the public API, plus report-only probes."""

from __future__ import annotations

import functools
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .algebra import (
    EPS0,
    K,
    K1,
    K_INF,
    M,
    PI,
    W,
    convolution,
    pi_top,
    random_piecewise,
    random_step,
    tau_lt,
    verified,
)
from .ddf import Order, compare, lam, point_mass, pointwise, scalar_mul, sibley, uniform
from .integral import (
    MeasurableFunction,
    SimpleFunction,
    ae_equal,
    identity,
    integrate,
    integrate_simple,
    induced_measure,
    layered_closed_form,
    layered_integral,
    moore_utility,
    probe_linearity,
    probe_product,
    tau_m,
)
from .measures import (
    check_measure,
    combine,
    counting,
    epsilon_of,
    gamma_a,
    length,
    scaled_body,
    singleton_generated,
    weighted,
)
from .oracle import GridPlan, brute_sibley, brute_tau, exhaustive_measure_check
from .sets import Finite, Intervals, IntervalSet


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} ({self.cases} cases, {len(self.failures)} failures)"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": self.cases,
                "failures": [str(f) for f in self.failures[:20]], "info": _jsonable(self.info)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, Order):
        return v.value
    return v


# -- fixtures -----------------------------------------------------------------


EXACT_TAUS: dict[str, Callable] = {
    "tauLT(K_1,M)": lambda: tau_lt(K1, M),
    "tauLT(K_1,Pi)": lambda: tau_lt(K1, PI),
    "tauLT(K_inf,M)": lambda: tau_lt(K_INF, M),
    "tauLT(K_inf,Pi)": lambda: tau_lt(K_INF, PI),
    "piTop(M)": lambda: pi_top(M),
    "piTop(Pi)": lambda: pi_top(PI),
    "convolution": lambda: convolution(),
}


@functools.cache
def exact_tau(name: str):
    return verified(EXACT_TAUS[name]())


def dyadic(rng: random.Random, hi: int = 8, denom: int = 4) -> Fraction:
    return Fraction(rng.randint(0, hi), denom)


def random_simple(rng: random.Random, U, max_pieces: int = 3) -> SimpleFunction:
    """Random simple function over a finite universe or the interval ring, with dyadic data."""
    k = rng.randint(1, max_pieces)
    if isinstance(U, Finite):
        groups: dict = {}
        for e in sorted(U.full()):
            j = rng.randint(0, k)
            if j:
                groups.setdefault(j, set()).add(e)
        return SimpleFunction(U, tuple((frozenset(s), dyadic(rng)) for _, s in sorted(groups.items())))
    cuts = sorted(rng.sample(range(17), 2 * k))
    pieces = [(IntervalSet.of((Fraction(cuts[2 * i], 16), Fraction(cuts[2 * i + 1], 16))), dyadic(rng)) for i in range(k)]
    return SimpleFunction(U, tuple(pieces))


def finite_measure(rng: random.Random, tau, n: int = 4, piecewise: bool = False, nulls: int = 0):
    bodies = [random_piecewise(rng) if piecewise and rng.random() < 0.5 else random_step(rng) for _ in range(n)]
    for i in rng.sample(range(n), nulls):
        bodies[i] = EPS0
    return singleton_generated(Finite(n), tau, bodies)


def _cycle(count: int):
    names = list(EXACT_TAUS)
    return [(i, exact_tau(names[i % len(names)])) for i in range(count)]


# -- closed-form reproductions ------------------------------------------------


def check_layered_example(count: int = 20, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("layered example exact")
    for i in range(count):
        n = rng.randint(1, 4)
        cuts = sorted(rng.sample(range(1, 16), n))
        bounds = [0] + cuts
        parts = [(IntervalSet.of((Fraction(a, 16), Fraction(b, 16))), None) for a, b in zip(bounds, bounds[1:] + [16])][:n]
        levels = sorted(Fraction(rng.randint(0, 7), 8) for _ in range(n))
        parts = [(E, a) for (E, _), a in zip(parts, levels)]
        E = Intervals().random_set(rng) | IntervalSet.of((Fraction(rng.randint(0, 15), 16), 1))
        x0 = dyadic(rng, 12, 4)
        got = layered_integral(x0, E, parts)
        want = layered_closed_form(x0, E, parts)
        res.cases += 1
        if got != want:
            res.failures.append((i, got, want))
    return res


def check_lebesgue_embedding(count: int = 50, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    U = Intervals()
    res = CheckResult("gamma^a integral equals classical integral times lambda^a")
    for i in range(count):
        a = Fraction(rng.randint(0, 8), 8)
        gamma = gamma_a(U, tau_m(), length, a)
        f = random_simple(rng, U)
        E = U.random_set(rng) | IntervalSet.of((Fraction(1, 2), Fraction(3, 4)))
        r = sum((x * (E & Ei).length for Ei, x in f.pieces), Fraction(0))
        res.cases += 1
        if integrate_simple(f, gamma, E) != scalar_mul(r, lam(a)):
            res.failures.append((i, f, a))
    return res


def check_moore(count: int = 50, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("moore utility is uniform on the weighted interval mean")
    for i in range(count):
        n = rng.randint(1, 5)
        xs = [Fraction(rng.randint(0, 8), 8) for _ in range(n)]
        ivs = []
        for _ in range(n):
            a = dyadic(rng, 8, 4)
            ivs.append((a, a + dyadic(rng, 8, 4) * (rng.random() < 0.85)))
        alpha = sum(x * a for x, (a, _) in zip(xs, ivs))
        beta = sum(x * b for x, (_, b) in zip(xs, ivs))
        res.cases += 1
        got = moore_utility(xs, ivs)
        if got != uniform(alpha, beta):
            res.failures.append((i, xs, ivs, got))
    return res


def check_scalar_law(count: int = 100, seed: int = 0, n: int = 1024) -> CheckResult:
    """``tau_{L,M}(c1 G, c2 G) = L(c1, c2) G``: exact for K_1 and K_inf, oracle band for K_2."""
    rng = random.Random(seed)
    res = CheckResult("scalar law tau_{L,M}(c1 G, c2 G) = L(c1,c2) G")
    worst = 0.0
    for i in range(count):
        G = random_step(rng, denom=8)
        c1, c2 = Fraction(rng.randint(1, 8), 8), Fraction(rng.randint(1, 8), 8)
        A, B = scalar_mul(c1, G), scalar_mul(c2, G)
        for L in (K1, K_INF):
            res.cases += 1
            if tau_lt(L, M)(A, B) != scalar_mul(L(c1, c2), G):
                res.failures.append((i, L.name))
        L2 = K(2)
        route = tau_lt(L2, M)(A, B)
        oracle = brute_tau(L2, M, A, B, GridPlan.covering(A, B, n=n, L=L2))
        gap = sibley(route, oracle)
        worst = max(worst, gap)
        res.cases += 1
        if gap > 2 / n:
            res.failures.append((i, "K_2", gap))
    res.info["k2_worst_gap"] = worst
    res.info["band"] = 2 / n
    return res


def check_classical_embedding(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("epsilon-of-m integral equals classical integral")
    for i in range(count):
        if i % 2:
            U = Intervals()
            m = length
        else:
            U = Finite(5)
            m = counting if i % 4 == 0 else weighted([dyadic(rng, 8, 2) for _ in range(5)])
        gamma = epsilon_of(U, tau_m(), m)
        f = random_simple(rng, U)
        E = U.random_set(rng)
        want = sum((x * m(E & Ei) for Ei, x in f.pieces), Fraction(0))
        res.cases += 1
        if integrate_simple(f, gamma, E) != point_mass(want):
            res.failures.append((i, f, E))
    return res


def check_limit(depth: int = 12, tol: float = 1e-2) -> CheckResult:
    res = CheckResult("staircase limit of the identity integrand")
    U = Intervals()
    for label, phi in (("eps_1", point_mass(1)), ("uniform(0,1)", uniform(0, 1)), ("lambda^0.3", lam(Fraction(3, 10)))):
        t0 = time.perf_counter()
        out = integrate(identity(), scaled_body(U, tau_m(), length, phi), U.full(), depth)
        elapsed = time.perf_counter() - t0
        target = scalar_mul(Fraction(1, 2), phi)
        final = sibley(out.value, target)
        to_target = [sibley(p, target) for p in out.partials]
        tail = out.gaps[3:]
        monotone = all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))
        res.cases += 1
        res.info[label] = {"final_gap": final, "successive_gaps": out.gaps, "gaps_to_target": to_target,
                           "seconds": elapsed}
        if not (final < tol and monotone):
            res.failures.append((label, final, monotone))
    res.info["total_seconds"] = sum(v["seconds"] for k, v in res.info.items() if isinstance(v, dict))
    return res


# -- oracle cross-validation --------------------------------------------------


def check_oracle_tau(count: int = 100, seed: int = 0, n: int = 1024) -> CheckResult:
    res = CheckResult(f"step sup-convolution vs grid oracle within 2/{n}")
    worst: dict = {}
    for L in (K1, K(2), K_INF):
        for T in (M, PI, W):
            key = f"{L.name},{T.name}"
            rng = random.Random(f"{seed}:{key}")
            tau = tau_lt(L, T)
            worst[key] = 0.0
            for i in range(count):
                G, H = random_step(rng, denom=8), random_step(rng, denom=8)
                gap = sibley(tau(G, H), brute_tau(L, T, G, H, GridPlan.covering(G, H, n=n, L=L)))
                worst[key] = max(worst[key], gap)
                res.cases += 1
                if gap > 2 / n:
                    res.failures.append((key, i, gap))
    res.info["worst_gap"] = worst
    return res


def check_oracle_sibley(count: int = 100, seed: int = 0, n: int = 1024) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult(f"sibley vs brute scan within 2/{n}")
    worst = 0.0
    for i in range(count):
        F = random_step(rng) if rng.random() < 0.5 else random_piecewise(rng)
        G = random_step(rng) if rng.random() < 0.5 else random_piecewise(rng)
        gap = abs(sibley(F, G) - brute_sibley(F, G, GridPlan(n)))
        worst = max(worst, gap)
        res.cases += 1
        if gap > 2 / n:
            res.failures.append((i, F, G, gap))
    res.info["worst_gap"] = worst
    return res


def check_point_mass_distance(count: int = 20, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("d_S(eps_0, eps_a) = min(a, 1)")
    values = [Fraction(1, 1000)] + [Fraction(rng.randint(1, 3000), 1000) for _ in range(count - 2)] + [Fraction(1)]
    for a in values:
        res.cases += 1
        d = sibley(point_mass(0), point_mass(a))
        if abs(d - min(float(a), 1.0)) > 1e-6:
            res.failures.append((a, d))
    return res


# -- theorem suite ------------------------------------------------------------


def check_antimonotone(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral is antimonotone in the integrand")
    for i, tau in _cycle(count):
        gamma = finite_measure(rng, tau)
        U = gamma.universe
        f = random_simple(rng, U)
        g = f + random_simple(rng, U)
        E = U.random_set(rng)
        res.cases += 1
        if compare(integrate_simple(f, gamma, E), integrate_simple(g, gamma, E)) not in (Order.GE, Order.EQ):
            res.failures.append((i, tau.name))
    return res


def check_homogeneity(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral is positively homogeneous")
    for i, tau in _cycle(count):
        gamma = finite_measure(rng, tau)
        f = random_simple(rng, gamma.universe)
        E = gamma.universe.random_set(rng)
        c = Fraction(rng.randint(0, 12), 4)
        res.cases += 1
        if integrate_simple(f.scale(c), gamma, E) != scalar_mul(c, integrate_simple(f, gamma, E)):
            res.failures.append((i, tau.name, c))
    return res


def check_measure_scaling(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral against c*gamma and against a larger measure")
    for i, tau in _cycle(count):
        gamma = finite_measure(rng, tau)
        U = gamma.universe
        f = random_simple(rng, U)
        E = U.random_set(rng)
        c = Fraction(rng.randint(1, 12), 4)
        base = integrate_simple(f, gamma, E)
        res.cases += 1
        if integrate_simple(f, combine(c, gamma), E) != scalar_mul(c, base):
            res.failures.append((i, tau.name, "homogeneity", c))
        # pointwise max of bodies raises every gamma_E (tau is monotone)
        bigger = singleton_generated(U, tau, [pointwise(b, random_step(rng), max, kink=lambda g, h: g - h)
                                              for b in gamma.source.bodies])
        if compare(base, integrate_simple(f, bigger, E)) not in (Order.LE, Order.EQ):
            res.failures.append((i, tau.name, "monotone"))
    return res


def check_null_annihilation(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integrals over null sets vanish")
    for i, tau in _cycle(count):
        gamma = finite_measure(rng, tau, n=4, nulls=2)
        U = gamma.universe
        null_elems = [e for e, b in zip(sorted(U.full()), gamma.source.bodies) if b == EPS0]
        N = frozenset(e for e in null_elems if rng.random() < 0.7)
        f = random_simple(rng, U)
        res.cases += 1
        if integrate_simple(f, gamma, N) != EPS0:
            res.failures.append((i, tau.name, N))
        all_null = scaled_body(U, tau, counting, EPS0)
        if integrate_simple(f, all_null, U.random_set(rng)) != EPS0:
            res.failures.append((i, tau.name, "all-null"))
    return res


def check_tau_m_linearity(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral is additive in the integrand under tau_{K_1,M}")
    for i in range(count):
        gamma = finite_measure(rng, tau_m(), piecewise=True)
        U = gamma.universe
        rep = probe_linearity(random_simple(rng, U), random_simple(rng, U), gamma, U.random_set(rng))
        res.cases += 1
        if not rep.equal:
            res.failures.append((i, rep.order, rep.gap))
    return res


def check_measure_sum(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral against a sum of measures")
    for i, tau in _cycle(count):
        g1, g2 = finite_measure(rng, tau), finite_measure(rng, tau)
        U = g1.universe
        f = random_simple(rng, U)
        E = U.random_set(rng)
        res.cases += 1
        lhs = integrate_simple(f, combine(g1, g2), E)
        if lhs != tau(integrate_simple(f, g1, E), integrate_simple(f, g2, E)):
            res.failures.append((i, tau.name))
    return res


def check_induced(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("induced set function passes the exhaustive decomposability check")
    for i, tau in _cycle(count):
        n = rng.randint(1, 4)
        gamma = finite_measure(rng, tau, n=n)
        nu = induced_measure(MeasurableFunction.of_simple(random_simple(rng, gamma.universe)), gamma)
        rep = exhaustive_measure_check(nu)
        res.cases += 1
        if not rep.passed:
            res.failures.append((i, tau.name, rep.failures[:3]))
    return res


def check_ae(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("functions equal off a null set have equal integrals")
    for i, tau in _cycle(count):
        gamma = finite_measure(rng, tau, n=4, nulls=1)
        U = gamma.universe
        null_e = next(e for e, b in zip(sorted(U.full()), gamma.source.bodies) if b == EPS0)
        f = random_simple(rng, U)
        N = frozenset({null_e})
        g = f.restrict(U.full() - N) + SimpleFunction.chi(U, N, dyadic(rng, 20, 4))
        F, G = MeasurableFunction.of_simple(f), MeasurableFunction.of_simple(g)
        E = U.random_set(rng) | N
        res.cases += 1
        if not ae_equal(F, G, gamma, E):
            res.failures.append((i, tau.name, "not a.e. equal"))
        elif integrate(F, gamma, E).value != integrate(G, gamma, E).value:
            res.failures.append((i, tau.name, "integrals differ"))
    return res


def check_representation(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    res = CheckResult("integral does not depend on the representation")
    for i, tau in _cycle(count):
        if i % 2:
            U, gamma = Finite(5), finite_measure(rng, tau, n=5)
        else:
            # m(E) (.) phi is decomposable only when L matches the additivity of length
            U = Intervals()
            gamma = scaled_body(U, tau_m(), length, random_step(rng))
        f = random_simple(rng, U)
        g = f.refine(2)
        pieces = list(g.pieces)
        rng.shuffle(pieces)
        g = SimpleFunction(U, tuple(pieces))
        E = U.random_set(rng)
        res.cases += 1
        if not f.same_function(g) or integrate_simple(f, gamma, E) != integrate_simple(g, gamma, E):
            res.failures.append((i, tau.name))
    return res


THEOREM_SUITE = (
    check_antimonotone,
    check_homogeneity,
    check_measure_scaling,
    check_null_annihilation,
    check_tau_m_linearity,
    check_measure_sum,
    check_induced,
    check_ae,
    check_representation,
)


# -- probes -------------------------------------------------------------------


def probe_sum_direction(count: int = 100, seed: int = 0) -> CheckResult:
    """Record how ``I(f + g)`` compares with ``I(f) (+) I(g)`` under product and Lukasiewicz t-norms."""
    res = CheckResult("probe: additivity direction for tau_{K_1,Pi} and tau_{K_1,W}")
    for label, T in (("Pi", PI), ("W", W)):
        rng = random.Random(seed)
        tau = verified(tau_lt(K1, T))
        tally: dict = {}
        for _ in range(count):
            gamma = finite_measure(rng, tau)
            U = gamma.universe
            rep = probe_linearity(random_simple(rng, U), random_simple(rng, U), gamma, U.random_set(rng))
            tally[rep.order.value] = tally.get(rep.order.value, 0) + 1
            res.cases += 1
        strict = sorted(k for k in tally if k != Order.EQ.value)
        res.info[label] = {"tally": tally, "direction": strict[0] if len(strict) == 1 else strict,
                           "consistent": len(strict) <= 1 and Order.INCOMPARABLE.value not in strict}
    return res


def probe_order_metric(count: int = 100, seed: int = 0) -> CheckResult:
    """For ``G <= H`` record which of ``d(G, eps_0)`` and ``d(H, eps_0)`` is smaller."""
    rng = random.Random(seed)
    res = CheckResult("probe: order versus distance to the unit mass at 0")
    tally = {"d(G)<=d(H)": 0, "d(H)<=d(G)": 0, "strict d(H)<d(G)": 0, "strict d(G)<d(H)": 0}
    for _ in range(count):
        G = random_step(rng) if rng.random() < 0.5 else random_piecewise(rng)
        H = pointwise(G, random_step(rng), max, kink=lambda g, h: g - h)
        dg, dh = sibley(G, EPS0), sibley(H, EPS0)
        res.cases += 1
        tally["d(G)<=d(H)"] += dg <= dh
        tally["d(H)<=d(G)"] += dh <= dg
        tally["strict d(H)<d(G)"] += dh < dg
        tally["strict d(G)<d(H)"] += dg < dh
    res.info["tally"] = tally
    res.info["observed"] = "G <= H implies d(H, eps_0) <= d(G, eps_0)" if tally["d(H)<=d(G)"] == count else "mixed"
    return res


def probe_triple(count: int = 20, seed: int = 0) -> CheckResult:
    """Record the three-way comparison of integrals against induced measures and of the product."""
    rng = random.Random(seed)
    res = CheckResult("probe: f d(nu^g), g d(nu^f) and fg d(gamma)")
    cases = []
    for i in range(count):
        tau = tau_m() if i % 2 == 0 else exact_tau("tauLT(K_1,Pi)")
        gamma = finite_measure(rng, tau, n=3)
        U = gamma.universe
        rep = probe_product(random_simple(rng, U), random_simple(rng, U), gamma, U.random_set(rng))
        res.cases += 1
        cases.append({"tau": tau.name, "orders": {k: v.value for k, v in rep.orders.items()},
                      "gaps": rep.gaps, "all_equal": rep.all_equal})
    res.info["cases"] = cases
    res.info["all_equal_count"] = sum(c["all_equal"] for c in cases)
    return res


PROBES = (probe_sum_direction, probe_order_metric, probe_triple)


# -- suites -------------------------------------------------------------------


def _measure_suite(seed: int) -> list[CheckResult]:
    rng = random.Random(seed)
    out = []
    fixtures = [
        ("epsilon_of(counting), n=4", epsilon_of(Finite(4), tau_m(), counting)),
        ("gamma_a(length, 1/2)", gamma_a(Intervals(), tau_m(), length, Fraction(1, 2))),
        ("singleton steps, n=4", finite_measure(rng, tau_m())),
        ("scaled_body(length, uniform)", scaled_body(Intervals(), tau_m(), length, uniform(0, 1))),
    ]
    for name, gamma in fixtures:
        rep = check_measure(gamma, samples=30, seed=seed)
        out.append(CheckResult(f"measure checks: {name}", 1, rep.failures[:5]))
    return out


SUITES = {
    "closed_forms": lambda c, s: [check_layered_example(c, s), check_lebesgue_embedding(c, s), check_moore(c, s),
                                  check_classical_embedding(c, s), check_limit()],
    "algebra": lambda c, s: [check_scalar_law(c, s)],
    "oracle": lambda c, s: [check_oracle_tau(max(1, c // 4), s), check_oracle_sibley(c, s), check_point_mass_distance(20, s)],
    "measures": lambda c, s: _measure_suite(s),
    "theorems": lambda c, s: [fn(c, s) for fn in THEOREM_SUITE],
    "probes": lambda c, s: [fn(c, s) for fn in PROBES],
}


def run_suite(name: str, count: int = 20, seed: int = 0) -> list[CheckResult]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
        out.extend(SUITES[n](count, seed))
    return out


def report_json(results: list[CheckResult], **meta) -> str:
    body = {"meta": meta, "passed": all(r.passed for r in results), "checks": [r.to_json() for r in results]}
    return json.dumps(body, indent=2, sort_keys=True, default=str)
