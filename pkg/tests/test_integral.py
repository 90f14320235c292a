import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdi.algebra import EPS0, K1, PI, W, tau_lt, verified
from pdi.ddf import DDF, DDFError, Knot, Order, compare, epsilon_inf, lam, point_mass, scalar_mul, sibley, uniform
from pdi.integral import (
    MeasurableFunction,
    SimpleFunction,
    ae_equal,
    choquet_like,
    choquet_of,
    choquet_refinement,
    disagreement,
    function_from_spec,
    identity,
    induced_measure,
    integrate,
    integrate_simple,
    layered_closed_form,
    layered_integral,
    level_decomposition,
    moore_utility,
    power,
    probe_linearity,
    probe_product,
    scaled,
    staircase,
    tau_m,
)
from pdi.measures import counting, epsilon_of, gamma_a, length, scaled_body, singleton_generated
from pdi.oracle import exhaustive_measure_check
from pdi.sets import Finite, Intervals, IntervalSet
from pdi.verify import finite_measure, random_simple

HALF = Fraction(1, 2)
U4 = Finite(4)
I = Intervals()


def iv(a, b):
    return IntervalSet.of((Fraction(a), Fraction(b)))


def fs(*xs):
    return frozenset(xs)


class TestSimpleFunction:
    def test_overlap_rejected(self):
        with pytest.raises(DDFError):
            SimpleFunction(U4, ((fs(1, 2), 1), (fs(2, 3), 2)))
        with pytest.raises(DDFError):
            SimpleFunction(I, ((iv(0, HALF), 1), (iv(Fraction(1, 4), 1), 2)))

    def test_values_finite_non_negative(self):
        with pytest.raises(DDFError):
            SimpleFunction(U4, ((fs(1), -1),))
        with pytest.raises(DDFError):
            SimpleFunction(U4, ((fs(1), float("inf")),))

    def test_canonical_merges_and_drops(self):
        f = SimpleFunction(U4, ((fs(1), 2), (fs(2), 2), (fs(3), 0)))
        assert f.canonical().pieces == ((fs(1, 2), 2),)
        assert f.same_function(SimpleFunction(U4, ((fs(2, 1), 2),)))

    def test_sum_and_product(self):
        f = SimpleFunction(I, ((iv(0, HALF), 1),))
        g = SimpleFunction(I, ((iv(Fraction(1, 4), 1), 2),))
        h = f + g
        assert [h.value_at(Fraction(x, 8)) for x in (1, 3, 5)] == [1, 3, 2]
        p = f * g
        assert [p.value_at(Fraction(x, 8)) for x in (1, 3, 5)] == [0, 2, 0]
        assert f <= h and not h <= f

    @given(st.integers(0, 2**32 - 1))
    def test_refine_is_same_function(self, s):
        rng = random.Random(s)
        U = I if s % 2 else Finite(5)
        f = random_simple(rng, U)
        assert f.same_function(f.refine(3))


class TestIntegrateSimple:
    def test_characteristic(self):
        rng = random.Random(0)
        gamma = finite_measure(rng, tau_m())
        F, E = fs(1, 2, 3), fs(2, 3, 4)
        assert integrate_simple(SimpleFunction.chi(U4, F), gamma, E) == gamma(E & F)

    def test_zero(self):
        gamma = finite_measure(random.Random(1), tau_m())
        assert integrate_simple(SimpleFunction.zero(U4), gamma, U4.full()) == EPS0

    def test_gamma_a_closed_form(self):
        a = Fraction(3, 8)
        f = SimpleFunction(I, ((iv(0, Fraction(1, 4)), 2), (iv(HALF, 1), 3)))
        E = iv(Fraction(1, 8), Fraction(3, 4))
        r = 2 * Fraction(1, 8) + 3 * Fraction(1, 4)
        assert integrate_simple(f, gamma_a(I, tau_m(), length, a), E) == scalar_mul(r, lam(a))

    def test_pointwise_tau_fold(self):
        from pdi.algebra import M, pi_top

        tau = verified(pi_top(M))
        gamma = singleton_generated(Finite(2), tau, [uniform(0, 1), point_mass(1)])
        f = SimpleFunction(Finite(2), ((fs(1), 2), (fs(2), 3)))
        assert integrate_simple(f, gamma, fs(1, 2)) == tau(uniform(0, 2), point_mass(3))


class TestIntegrate:
    def test_simple_kind_delegates(self):
        gamma = finite_measure(random.Random(2), tau_m())
        f = random_simple(random.Random(3), U4)
        res = integrate(MeasurableFunction.of_simple(f), gamma, U4.full(), depth=3)
        assert res.value == integrate_simple(f, gamma, U4.full())

    def test_extended_on_non_null_set(self):
        gamma = epsilon_of(I, tau_m(), length)
        f = MeasurableFunction.extended(iv(0, Fraction(1, 4)), identity())
        assert integrate(f, gamma, I.full(), depth=4).value == epsilon_inf()

    def test_extended_on_null_set(self):
        gamma = singleton_generated(U4, tau_m(), [EPS0, point_mass(1), point_mass(2), EPS0])
        finite = MeasurableFunction.of_simple(SimpleFunction(U4, ((fs(2, 3), 2),)))
        f = MeasurableFunction.extended(fs(1, 4), finite)
        got = integrate(f, gamma, U4.full()).value
        assert got == point_mass(6)
        assert ae_equal(f, finite, gamma, U4.full())

    def test_identity_limit(self):
        phi = uniform(0, 1)
        res = integrate(identity(), scaled_body(I, tau_m(), length, phi), I.full(), depth=10)
        assert sibley(res.value, scalar_mul(HALF, phi)) < 1e-2
        assert not res.warnings
        tail = res.gaps[3:]
        assert all(b <= a for a, b in zip(tail, tail[1:]))

    def test_partials_non_increasing_and_lower_bound(self):
        res = integrate(power(2), scaled_body(I, tau_m(), length, point_mass(1)), I.full(), depth=8)
        for a, b in zip(res.partials, res.partials[1:]):
            assert compare(a, b) in (Order.GE, Order.EQ)
        for p in res.partials:
            assert compare(p, res.value) in (Order.GE, Order.EQ)

    def test_power_limit_value(self):
        res = integrate(power(2), epsilon_of(I, tau_m(), length), I.full(), depth=12)
        assert sibley(res.value, point_mass(Fraction(1, 3))) < 1e-2

    def test_warning_when_not_converged(self):
        res = integrate(identity(), epsilon_of(I, tau_m(), length), I.full(), depth=2)
        assert res.warnings
        assert res.diagnostics()["depth"] == 2

    def test_depth_bounds(self):
        with pytest.raises(DDFError):
            integrate(identity(), epsilon_of(I, tau_m(), length), I.full(), depth=0)
        with pytest.raises(DDFError):
            integrate(identity(), epsilon_of(I, tau_m(), length), I.full(), depth=21)

    def test_restriction_continuity_along_chain(self):
        gamma = scaled_body(I, tau_m(), length, uniform(0, 1))
        target = integrate(identity(), gamma, iv(0, HALF), depth=8).value
        gaps = [sibley(integrate(identity(), gamma, iv(0, HALF - Fraction(1, 2**k)), depth=8).value, target)
                for k in range(1, 17)]
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-2


class TestStaircase:
    def test_identity_levels(self):
        s = staircase(identity().builtin, 2)
        assert s.pieces == ((iv(Fraction(1, 4), HALF), Fraction(1, 4)), (iv(HALF, Fraction(3, 4)), HALF),
                            (iv(Fraction(3, 4), 1), Fraction(3, 4)))

    def test_cap_at_n(self):
        s = staircase(scaled(8, identity()).builtin, 1)
        assert max(x for _, x in s.pieces) == 1
        assert s.value_at(Fraction(99, 100)) == 1

    def test_power_exact_roots(self):
        s = staircase(power(2).builtin, 2)
        assert s.value_at(HALF) == Fraction(1, 4)
        assert s.pieces[0][0].pieces[0][0] == HALF  # sqrt(1/4) stays rational

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_minorant(self, n):
        b = scaled(3, power(2)).builtin
        s = staircase(b, n)
        for k in range(64):
            x = Fraction(k, 64)
            assert s.value_at(x) <= b(x)
            assert s.value_at(x) <= staircase(b, n + 1).value_at(x)


class TestInduced:
    def test_characteristic_of_universe_recovers_gamma(self):
        gamma = finite_measure(random.Random(4), tau_m())
        nu = induced_measure(MeasurableFunction.of_simple(SimpleFunction.chi(U4, U4.full())), gamma)
        assert all(nu(E) == gamma(E) for E in U4.all_sets())

    def test_zero_integrand(self):
        gamma = finite_measure(random.Random(5), tau_m())
        nu = induced_measure(MeasurableFunction.of_simple(SimpleFunction.zero(U4)), gamma)
        assert all(nu(E) == EPS0 for E in U4.all_sets())

    def test_exhaustive_additivity(self):
        rng = random.Random(6)
        gamma = finite_measure(rng, tau_m(), piecewise=True)
        nu = induced_measure(MeasurableFunction.of_simple(random_simple(rng, U4)), gamma)
        assert exhaustive_measure_check(nu).passed


class TestChoquet:
    def test_single_level(self):
        gamma = finite_measure(random.Random(7), tau_m())
        a, E1 = Fraction(3, 2), fs(1, 3)
        assert choquet_like([0, a], [E1], gamma, U4.full()) == integrate_simple(SimpleFunction.chi(U4, E1, a), gamma,
                                                                                  U4.full())

    def test_counting_two_levels(self):
        # levels 1 and 3 with {f >= 1} = {1,2,3}, {f >= 3} = {2}: sum is 1*3 + 2*1 = 5
        gamma = epsilon_of(U4, tau_m(), counting)
        assert choquet_like([0, 1, 3], [fs(1, 2, 3), fs(2)], gamma, U4.full()) == point_mass(5)

    def test_refinement_invariance(self):
        rng = random.Random(8)
        for _ in range(20):
            gamma = finite_measure(rng, tau_m(), piecewise=True)
            f = random_simple(rng, U4)
            rep = choquet_refinement(f, gamma, U4.random_set(rng))
            assert rep.equal and rep.coarse == rep.fine

    def test_matches_integral_under_tau_m(self):
        rng = random.Random(9)
        for _ in range(20):
            gamma = finite_measure(rng, tau_m())
            f = random_simple(rng, U4)
            E = U4.random_set(rng)
            assert choquet_of(f, gamma, E) == integrate_simple(f, gamma, E)

    def test_validation(self):
        gamma = epsilon_of(U4, tau_m(), counting)
        with pytest.raises(DDFError):
            choquet_like([0, 1, 2], [fs(1), fs(1, 2)], gamma, U4.full())
        with pytest.raises(DDFError):
            choquet_like([0, 2, 1], [fs(1, 2), fs(1)], gamma, U4.full())
        with pytest.raises(DDFError):
            choquet_like([1, 2], [fs(1)], gamma, U4.full())


class TestMoore:
    def test_example(self):
        assert moore_utility([HALF, HALF], [(0, 2), (1, 3)]) == uniform(HALF, Fraction(5, 2))

    def test_degenerate_intervals(self):
        assert moore_utility([Fraction(1, 4), 1], [(2, 2), (3, 3)]) == point_mass(Fraction(7, 2))

    def test_single(self):
        assert moore_utility([1], [(1, 4)]) == uniform(1, 4)

    def test_validation(self):
        with pytest.raises(DDFError):
            moore_utility([HALF], [(0, 1), (1, 2)])
        with pytest.raises(DDFError):
            moore_utility([], [])
        with pytest.raises(DDFError):
            moore_utility([2], [(0, 1)])


class TestProbes:
    def test_tau_m_equality(self):
        rng = random.Random(10)
        for _ in range(30):
            gamma = finite_measure(rng, tau_m(), piecewise=True)
            rep = probe_linearity(random_simple(rng, U4), random_simple(rng, U4), gamma, U4.full())
            assert rep.expects_equality and rep.equal and rep.ok

    @pytest.mark.parametrize("T", [PI, W], ids=lambda t: t.name)
    def test_zero_summand(self, T):
        rng = random.Random(11)
        gamma = finite_measure(rng, verified(tau_lt(K1, T)))
        rep = probe_linearity(random_simple(rng, U4), SimpleFunction.zero(U4), gamma, U4.full())
        assert rep.equal and not rep.expects_equality

    def test_product_probe_runs(self):
        rng = random.Random(12)
        gamma = finite_measure(rng, tau_m(), n=3)
        U = gamma.universe
        rep = probe_product(random_simple(rng, U), random_simple(rng, U), gamma, U.full())
        assert set(rep.orders) == {"f_dnu_g|g_dnu_f", "f_dnu_g|fg_dgamma", "g_dnu_f|fg_dgamma"}


class TestAe:
    def test_identical(self):
        f = MeasurableFunction.of_simple(random_simple(random.Random(13), I))
        gamma = gamma_a(I, tau_m(), length, HALF)
        assert ae_equal(f, f, gamma, I.full())

    def test_differ_on_empty_interval(self):
        gamma = gamma_a(I, tau_m(), length, HALF)
        f = MeasurableFunction.of_simple(SimpleFunction.chi(I, iv(0, HALF)))
        g = MeasurableFunction.of_simple(SimpleFunction(I, ((iv(0, HALF), 1), (iv(Fraction(3, 10), Fraction(3, 10)), 5))))
        assert ae_equal(f, g, gamma, I.full())

    def test_everything_null(self):
        gamma = scaled_body(I, tau_m(), length, EPS0)
        rng = random.Random(14)
        f = MeasurableFunction.of_simple(random_simple(rng, I))
        g = MeasurableFunction.of_simple(random_simple(rng, I))
        assert ae_equal(f, g, gamma, I.full())
        assert integrate(f, gamma, I.full()).value == integrate(g, gamma, I.full()).value == EPS0

    def test_non_null_difference(self):
        gamma = epsilon_of(U4, tau_m(), counting)
        f = MeasurableFunction.of_simple(SimpleFunction.chi(U4, fs(1)))
        g = MeasurableFunction.of_simple(SimpleFunction.chi(U4, fs(1), 2))
        assert not ae_equal(f, g, gamma, U4.full())
        assert ae_equal(f, g, gamma, fs(2, 3))

    def test_unrepresentable(self):
        f = identity()
        g = MeasurableFunction.of_simple(SimpleFunction.zero(I))
        with pytest.raises(DDFError):
            disagreement(f, g, I)


class TestLayered:
    PARTS = [(iv(0, Fraction(1, 4)), Fraction(1, 4)), (iv(Fraction(1, 4), HALF), HALF), (iv(HALF, 1), Fraction(3, 4))]

    def test_hand_case(self):
        want = DDF((Knot(0, 0, Fraction(1, 4)), Knot(HALF, Fraction(1, 4), HALF), Knot(1, HALF, Fraction(3, 4)),
                    Knot(2, Fraction(3, 4), 1)))
        assert layered_integral(2, I.full(), self.PARTS) == want
        assert layered_closed_form(2, I.full(), self.PARTS) == want

    def test_literal_cumulative_sum_disagrees(self):
        # r_i = s_1 + ... + s_i with s_i already cumulative counts early layers twice
        x0, E = 2, I.full()
        s, acc = [], Fraction(0)
        for Ei, _ in self.PARTS:
            acc += x0 * (E & Ei).length
            s.append(acc)
        literal_r = [sum(s[: i + 1]) for i in range(len(s))]
        got = layered_integral(x0, E, self.PARTS)
        breaks = [k.x for k in got.knots[1:]]
        assert breaks == s
        assert literal_r != s

    def test_level_decomposition(self):
        H = layered_integral(2, I.full(), self.PARTS)
        assert level_decomposition(H) == [(Fraction(1, 4), 0, HALF), (HALF, HALF, 1), (Fraction(3, 4), 1, 2),
                                          (1, 2, float("inf"))]

    def test_empty_layer_dropped(self):
        parts = [(iv(0, Fraction(1, 4)), Fraction(1, 8))] + self.PARTS[1:]
        E = iv(Fraction(1, 4), 1)
        assert layered_integral(1, E, parts) == layered_closed_form(1, E, parts)

    def test_unsorted_levels(self):
        with pytest.raises(DDFError):
            layered_closed_form(1, I.full(), self.PARTS[::-1])

    def test_overlapping_parts(self):
        with pytest.raises(DDFError):
            layered_integral(1, I.full(), [(iv(0, HALF), Fraction(1, 4)), (iv(Fraction(1, 4), 1), HALF)])


class TestSpec:
    def test_simple_and_builtin(self):
        f = function_from_spec({"kind": "simple", "pieces": [[[[0, 0.5]], 2]]}, I)
        assert f.simple.value_at(Fraction(1, 4)) == 2
        g = function_from_spec({"kind": "builtin", "name": "scaled", "c": 2, "inner": {"name": "power", "k": 2}}, I)
        assert g.builtin(HALF) == HALF

    @settings(max_examples=20)
    @given(st.integers(0, 2**32 - 1))
    def test_random_simple_roundtrip_through_pieces(self, s):
        f = random_simple(random.Random(s), Finite(5))
        spec = {"kind": "simple", "pieces": [[sorted(E), str(x)] for E, x in f.pieces]}
        assert function_from_spec(spec, Finite(5)).simple.same_function(f)
