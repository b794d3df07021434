import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinbath.engine import factor_f
from spinbath.recurrence import (
    EQUAL,
    GENERIC,
    INTEGER_MULTIPLES,
    RationalCoupling,
    RecurrenceError,
    bound_growth_estimate,
    bound_log_samples,
    classify_case,
    exact_recurrence,
    per_particle_recurrence,
    rationalize,
)

from recurrence_oracle import (
    best_approximation_distance,
    enumerate_sets,
    first_common_recurrence,
    is_recurrence_numeric,
)


def rc(*pairs):
    return [RationalCoupling(p, q) for p, q in pairs]


FIG3 = rc((12, 5), (6, 5), (3, 5), (3, 10))


class TestRationalCoupling:
    def test_reduced(self):
        c = RationalCoupling(6, 4)
        assert (c.p, c.q) == (3, 2)

    @pytest.mark.parametrize("p, q", [(0, 1), (1, 0), (-1, 2), (1.5, 2)])
    def test_invalid(self, p, q):
        with pytest.raises(RecurrenceError):
            RationalCoupling(p, q)


class TestPerParticle:
    def test_half(self):
        assert per_particle_recurrence(RationalCoupling(1, 2)) == 2

    def test_unit(self):
        assert per_particle_recurrence(RationalCoupling(1, 1)) == 1

    def test_three_tenths(self):
        t = per_particle_recurrence(RationalCoupling(3, 10))
        assert t == Fraction(10, 3)
        assert math.pi * t == pytest.approx(math.pi / 0.3, rel=1e-15)
        assert math.pi * t == pytest.approx(10.47, abs=5e-3)


class TestExactRecurrence:
    def test_equal_couplings(self):
        rep = exact_recurrence([RationalCoupling(1, 2)] * 100)
        assert rep.exact_time_over_pi == 2
        assert rep.case_label == EQUAL
        assert rep.product_bound_over_pi == 2 ** 100

    def test_integer_multiples(self):
        rep = exact_recurrence(FIG3)
        assert rep.exact_time_over_pi == Fraction(10, 3)
        assert rep.case_label == INTEGER_MULTIPLES
        assert rep.witnesses() == [8, 4, 2, 1]

    def test_bound_not_tight(self):
        rep = exact_recurrence(rc((2, 3), (4, 3)))
        assert rep.exact_time_over_pi == Fraction(3, 2)
        assert rep.product_bound_over_pi == 9
        assert not rep.to_dict()["bound_is_tight"]

    def test_empty(self):
        with pytest.raises(RecurrenceError):
            exact_recurrence([])
        with pytest.raises(RecurrenceError):
            classify_case([])

    def test_big_integers(self):
        primes = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149] * 10
        rep = exact_recurrence([RationalCoupling(1, q) for q in primes])
        assert rep.product_bound_over_pi > 2 ** 64
        assert rep.exact_time_over_pi == math.prod(primes[:10])
        assert rep.log10_bound == pytest.approx(sum(math.log10(q) for q in primes))

    def test_astronomical_time_is_inf_as_float(self):
        rep = exact_recurrence([RationalCoupling(1, 10**200), RationalCoupling(1, 10**200 + 1)])
        assert rep.exact_time == math.inf
        assert rep.log10_exact == pytest.approx(400, abs=1e-6)


class TestClassify:
    def test_equal(self):
        assert classify_case(rc((1, 2), (1, 2), (1, 2))) == EQUAL

    def test_multiples(self):
        assert classify_case(FIG3) == INTEGER_MULTIPLES

    def test_generic(self):
        assert classify_case(rc((1, 2), (1, 3), (2, 5))) == GENERIC


class TestAgainstBruteForce:
    def test_minimality_and_soundness_small_sets(self):
        for fr in enumerate_sets(3):
            couplings = [RationalCoupling.from_fraction(f) for f in fr]
            rep = exact_recurrence(couplings)
            assert rep.exact_time_over_pi == first_common_recurrence(fr), fr
            assert is_recurrence_numeric(fr, rep.exact_time_over_pi)
            assert is_recurrence_numeric(fr, Fraction(rep.product_bound_over_pi))

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(1, 50), st.integers(1, 50)), min_size=1, max_size=8))
    def test_dominance_and_witnesses(self, pairs):
        couplings = [RationalCoupling(p, q) for p, q in pairs]
        rep = exact_recurrence(couplings)
        for c, n in zip(couplings, rep.witnesses()):
            assert n >= 1
            # the product bound is an integer multiple of every per-particle period
            assert (rep.product_bound_over_pi * c.p) % c.q == 0
        assert (Fraction(rep.product_bound_over_pi) / rep.exact_time_over_pi).denominator == 1

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 30), st.floats(0.0, 1.0)),
                    min_size=1, max_size=6))
    def test_soundness_via_engine_factors(self, items):
        couplings = [RationalCoupling(p, q) for p, q, _ in items]
        rep = exact_recurrence(couplings)
        t = rep.exact_time
        for c, (_, _, a2) in zip(couplings, items):
            # periods can be large; compare against an exactly reduced time per factor
            n = rep.exact_time_over_pi / per_particle_recurrence(c)
            assert n.denominator == 1
            t_i = math.pi * float(per_particle_recurrence(c))
            assert factor_f(a2, float(c), t_i) == pytest.approx(1.0, abs=1e-9)
        if t < 1e6:
            for c, (_, _, a2) in zip(couplings, items):
                assert factor_f(a2, float(c), t) == pytest.approx(1.0, abs=1e-9)

    def test_case_a_independent_of_n(self):
        for n in (1, 5, 100, 1000):
            rep = exact_recurrence([RationalCoupling(3, 7)] * n)
            assert rep.exact_time_over_pi == Fraction(7, 3)

    def test_case_b_is_pi_over_gmin(self):
        gmin = Fraction(2, 7)
        couplings = [RationalCoupling.from_fraction(gmin * k) for k in (1, 3, 4, 9)]
        rep = exact_recurrence(couplings)
        assert rep.case_label == INTEGER_MULTIPLES
        assert rep.exact_time_over_pi == 1 / gmin


class TestRationalize:
    @pytest.mark.parametrize("g, expected", [(0.5, (1, 2)), (0.3, (3, 10)), (2.4, (12, 5))])
    def test_examples(self, g, expected):
        c = rationalize(g, 100)
        assert (c.p, c.q) == expected

    @pytest.mark.parametrize("g", [0.0, -1.0, math.nan, math.inf])
    def test_invalid(self, g):
        with pytest.raises(RecurrenceError):
            rationalize(g, 100)

    def test_never_rounds_to_zero(self):
        c = rationalize(1e-9, 10)
        assert (c.p, c.q) == (1, 10)

    @settings(max_examples=200)
    @given(st.floats(1e-2, 20.0), st.integers(1, 60))
    def test_best_approximation(self, g, max_den):
        c = rationalize(g, max_den)
        assert c.q <= max_den
        assert math.gcd(c.p, c.q) == 1
        assert abs(c.value - Fraction(g)) == best_approximation_distance(g, max_den)


class TestBoundGrowth:
    def test_forced_unit_denominator(self):
        assert bound_growth_estimate(10, 1, seed=3, mean=1.0, half_width=0.0) == 0.0

    def test_linear_in_n(self):
        e50 = bound_growth_estimate(100, 50, seed=11)
        e100 = bound_growth_estimate(100, 100, seed=12)
        assert e100 / e50 == pytest.approx(2.0, rel=0.15)

    def test_matches_direct_monte_carlo(self):
        samples = bound_log_samples(10, 100, seed=5)
        est = samples.mean()
        # independent oracle: single-particle denominators drawn directly
        rng = np.random.default_rng(99)
        qs = [Fraction(float(g)).limit_denominator(10).denominator for g in rng.uniform(0.4, 0.6, 20000)]
        expected = 100 * np.mean(np.log(qs))
        se = samples.std(ddof=1) / math.sqrt(len(samples))
        assert abs(est - expected) < 3 * se + 1e-9

    @pytest.mark.parametrize("args", [(1, 10, 0), (10, 0, 0)])
    def test_invalid(self, args):
        with pytest.raises(RecurrenceError):
            bound_growth_estimate(*args)
