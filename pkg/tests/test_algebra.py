import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdi.algebra import (
    D,
    EPS0,
    K,
    K1,
    K_INF,
    M,
    PI,
    W,
    SamplePlan,
    check_axioms,
    convolution,
    lop_eval,
    lop_solve,
    _quantile_sum,
    oplus_fold,
    pi_top,
    random_piecewise,
    random_step,
    tau_apply_info,
    tau_from_spec,
    tau_lt,
    tnorm_eval,
    verified,
)
from pdi.ddf import DDFError, Order, compare, lam, point_mass, pointwise, scalar_mul, sibley, uniform
from pdi.oracle import GridPlan, brute_tau
from strategies import bodies, positive_scalars, steps

ALL_TAUS = [tau_lt(L, T) for L in (K1, K(2), K_INF) for T in (M, PI, W)] + [
    pi_top(M), pi_top(PI), pi_top(W), convolution()]


class TestTNorms:
    def test_catalog_values(self):
        x, y = Fraction(3, 10), Fraction(7, 10)
        assert tnorm_eval(M, x, y) == x
        assert tnorm_eval(W, x, y) == 0
        assert tnorm_eval(D, x, y) == 0
        assert tnorm_eval(D, x, 1) == x
        assert tnorm_eval(M, 0.3, 0.7) == 0.3

    def test_out_of_range(self):
        with pytest.raises(DDFError):
            tnorm_eval(M, 1.5, 0.2)

    @pytest.mark.parametrize("T", [M, PI, W, D], ids=lambda t: t.name)
    @given(x=st.fractions(0, 1, max_denominator=16), y=st.fractions(0, 1, max_denominator=16),
           z=st.fractions(0, 1, max_denominator=16))
    def test_axioms(self, T, x, y, z):
        assert T(x, y) == T(y, x)
        assert T(T(x, y), z) == T(x, T(y, z))
        assert T(x, 1) == x
        if y <= z:
            assert T(x, y) <= T(x, z)

    def test_drastic_flagged(self):
        assert not D.left_continuous
        assert M.left_continuous and PI.left_continuous and W.left_continuous


class TestLOps:
    def test_catalog_values(self):
        assert lop_eval(K(2), 3, 4) == 5
        assert lop_eval(K_INF, 3, 4) == 4
        assert lop_solve(K1, 7, 3) == 4

    def test_max_solve(self):
        assert lop_solve(K_INF, 4, 3) == 4
        assert lop_solve(K_INF, 3, 4) is None

    def test_alpha_positive(self):
        with pytest.raises(DDFError):
            K(0)

    @pytest.mark.parametrize("L", [K1, K(2), K(Fraction(1, 2)), K_INF], ids=lambda l: l.name)
    @given(u=st.fractions(0, 8, max_denominator=8), v=st.fractions(0, 8, max_denominator=8))
    def test_laws(self, L, u, v):
        assert L(u, v) == L(v, u)
        assert L(u, 0) == u
        x = L(u, v)
        w = lop_solve(L, x, u)
        assert w is not None
        assert abs(float(L(u, w)) - float(x)) <= 1e-12

    @given(u=st.fractions(0, 4, max_denominator=8), v=st.fractions(0, 4, max_denominator=8),
           w=st.fractions(0, 4, max_denominator=8))
    def test_associative_k2(self, u, v, w):
        L = K(2)
        assert abs(float(L(L(u, v), w)) - float(L(u, L(v, w)))) <= 1e-12


class TestTauApply:
    def test_point_masses_add(self):
        assert tau_lt(K1, M)(point_mass(1), point_mass(2)) == point_mass(3)

    @given(positive_scalars, positive_scalars, bodies)
    def test_scalar_law_k1(self, c1, c2, G):
        assert tau_lt(K1, M)(scalar_mul(c1, G), scalar_mul(c2, G)) == scalar_mul(c1 + c2, G)

    @given(positive_scalars, positive_scalars, bodies)
    def test_scalar_law_kinf(self, c1, c2, G):
        assert tau_lt(K_INF, M)(scalar_mul(c1, G), scalar_mul(c2, G)) == scalar_mul(max(c1, c2), G)

    def test_pointwise_min_of_lambdas(self):
        assert pi_top(M)(lam(Fraction(1, 4)), lam(Fraction(3, 4))) == lam(Fraction(1, 4))

    def test_convolution_of_point_masses(self):
        assert convolution()(point_mass(1), point_mass(Fraction(5, 2))) == point_mass(Fraction(7, 2))

    @pytest.mark.parametrize("tau", ALL_TAUS, ids=lambda t: t.name)
    @given(G=bodies)
    def test_identity(self, tau, G):
        assert tau(EPS0, G) == G
        assert tau(G, EPS0) == G

    def test_drastic_rejected_for_pointwise(self):
        with pytest.raises(DDFError):
            pi_top(D)

    def test_routes(self):
        G, H = uniform(0, 1), uniform(1, 2)
        assert tau_apply_info(tau_lt(K1, M), G, H)[1].route == "quantile"
        assert tau_apply_info(tau_lt(K1, M), G, H)[1].exact
        info = tau_apply_info(tau_lt(K1, PI, resolution=64), G, H)[1]
        assert not info.exact and info.resolution == 64
        assert tau_apply_info(tau_lt(K1, PI), point_mass(1), point_mass(2))[1].route == "step"
        assert tau_apply_info(convolution(64), G, H)[1].resolution == 64

    def test_quantile_route_matches_step_route(self):
        rng = random.Random(3)
        for L in (K1, K_INF):
            for _ in range(50):
                G, H = random_step(rng), random_step(rng)
                step_val = tau_lt(L, M)(G, H)
                assert _quantile_sum(L, G, H, None) == step_val

    def test_convolution_conserves_mass(self):
        rng = random.Random(4)
        for _ in range(50):
            out = convolution()(random_step(rng), random_step(rng))
            assert out.top == 1 and out.is_step

    def test_tnorm_ordering_lifts(self):
        rng = random.Random(5)
        for _ in range(50):
            G, H = random_step(rng), random_step(rng)
            assert compare(tau_lt(K1, PI)(G, H), tau_lt(K1, M)(G, H)) in (Order.LE, Order.EQ)

    @pytest.mark.parametrize("tau", [tau_lt(K1, M), tau_lt(K1, PI), tau_lt(K_INF, W), pi_top(M), convolution()],
                             ids=lambda t: t.name)
    @given(G=steps, G2=steps, H=steps)
    def test_monotone(self, tau, G, G2, H):
        big = pointwise(G, G2, max, kink=lambda g, h: g - h)
        assert compare(tau(G, H), tau(big, H)) in (Order.LE, Order.EQ)

    @pytest.mark.parametrize("L", [K1, K(2), K_INF], ids=lambda l: l.name)
    @pytest.mark.parametrize("T", [M, PI, W], ids=lambda t: t.name)
    def test_step_route_vs_oracle(self, L, T):
        rng = random.Random(f"unit:{L.name}:{T.name}")
        n = 256
        for _ in range(10):
            G, H = random_step(rng, denom=8), random_step(rng, denom=8)
            oracle = brute_tau(L, T, G, H, GridPlan.covering(G, H, n=n, L=L))
            assert sibley(tau_lt(L, T)(G, H), oracle) <= 2 / n


class TestFold:
    def test_single(self):
        G = uniform(1, 3)
        assert oplus_fold(tau_lt(K1, PI), [G]) == G

    def test_empty(self):
        assert oplus_fold(tau_lt(K1, M), []) == EPS0

    def test_point_masses(self):
        assert oplus_fold(tau_lt(K1, M), [point_mass(1), point_mass(2), point_mass(3)]) == point_mass(6)

    @pytest.mark.parametrize("tau", ALL_TAUS, ids=lambda t: t.name)
    def test_units(self, tau):
        assert oplus_fold(tau, [EPS0, EPS0, EPS0]) == EPS0

    def test_order_irrelevant_on_exact_routes(self):
        rng = random.Random(6)
        for tau in (tau_lt(K1, M), tau_lt(K1, PI), pi_top(W), convolution()):
            for _ in range(10):
                bs = [random_step(rng) for _ in range(3)]
                assert oplus_fold(tau, bs) == oplus_fold(tau, bs[::-1])


class TestAxioms:
    @pytest.mark.parametrize("tau", [tau_lt(K1, M), pi_top(M), convolution(), tau_lt(K_INF, PI), pi_top(W)],
                             ids=lambda t: t.name)
    def test_exact_families_pass(self, tau):
        rep = check_axioms(tau)
        assert rep.passed, rep.failures
        assert rep.distributive

    def test_grid_route_within_band(self):
        rep = check_axioms(tau_lt(K1, PI, resolution=256), SamplePlan(count=4, include_piecewise=True))
        assert rep.results["identity"] and rep.results["symmetry"]

    def test_verified_sets_flag(self):
        tau = tau_lt(K1, M)
        assert not tau.distributive
        assert verified(tau).distributive

    def test_lines(self):
        rep = check_axioms(pi_top(M), SamplePlan(count=2))
        assert all(line.startswith("PASS") for line in rep.lines())


class TestSpec:
    def test_parse(self):
        tau = tau_from_spec({"kind": "tauLT", "L": {"kind": "K", "alpha": 1}, "T": "M"})
        assert tau.L == K1 and tau.T is M
        assert tau_from_spec({"kind": "tauLT", "L": {"kind": "Kinf"}, "T": "W"}).L == K_INF
        assert tau_from_spec({"kind": "piTop", "T": "W"}).kind == "piTop"
        assert tau_from_spec({"kind": "convolution", "resolution": 64}).resolution == 64

    def test_unknown_tnorm(self):
        with pytest.raises(DDFError):
            tau_from_spec({"kind": "piTop", "T": "Q"})

    def test_pointwise_drastic_spec(self):
        with pytest.raises(DDFError):
            tau_from_spec({"kind": "piTop", "T": "D"})


@pytest.mark.parametrize("seed", range(5))
def test_piecewise_generator_is_valid(seed):
    F = random_piecewise(random.Random(seed))
    assert F.top == 1
