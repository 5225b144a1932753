#!/usr/bin/env python3
"""
Tests for descriptors, exact convergents and interval evaluation.
"""

import math
from fractions import Fraction
from itertools import islice

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hurwitz_approx.cf_engine import (
    Const,
    Progression,
    HurwitzianDescriptor,
    DescriptorError,
    RationalInterval,
    builtin_descriptor,
    quadratic_descriptor,
    parse_descriptor,
    partial_quotient,
    quotients,
    cycle_position,
    is_leaping_index,
    leaping_offsets,
    convergent,
    convergents,
    eval_interval,
    mu,
    mu_limit,
)


def first_quotients(d, count, start=0):
    return list(islice(quotients(d, start), count))


def to_mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


class TestBuiltinDescriptors:
    """The classical expansions emit the expected quotients."""

    def test_e(self):
        d = builtin_descriptor('e')
        assert d.b0 == 2
        assert d.cycle == (Const(1), Progression.linear(2, 0), Const(1))
        assert first_quotients(d, 9) == [2, 1, 2, 1, 1, 4, 1, 1, 6]

    def test_exp_inv(self):
        d = builtin_descriptor('exp_inv', 2)
        assert d.cycle == (Progression.linear(4, -3), Const(1), Const(1))
        assert first_quotients(d, 4, start=1) == [1, 1, 1, 5]
        assert first_quotients(builtin_descriptor('exp_inv', 3), 8) == [1, 2, 1, 1, 8, 1, 1, 14]

    def test_exp_2_over_odd(self):
        d = builtin_descriptor('exp_2_over', 3)
        assert d.start_j == 0
        assert d.cycle == (
            Progression.linear(9, 1),
            Progression.linear(36, 18),
            Progression.linear(9, 7),
            Const(1),
            Const(1),
        )
        assert first_quotients(d, 11) == [1, 1, 18, 7, 1, 1, 10, 54, 16, 1, 1]

    def test_exp_2_over_dispatch(self):
        assert first_quotients(builtin_descriptor('exp_2_over', 2), 8) == first_quotients(builtin_descriptor('e'), 8)
        assert first_quotients(builtin_descriptor('exp_2_over', 6), 8) == \
            first_quotients(builtin_descriptor('exp_inv', 3), 8)
        assert first_quotients(builtin_descriptor('exp_2_over', 1), 11) == [7, 2, 1, 1, 3, 18, 5, 1, 1, 6, 30]

    def test_tanh_inv(self):
        assert first_quotients(builtin_descriptor('tanh_inv', 1), 4) == [0, 1, 3, 5]
        assert first_quotients(builtin_descriptor('tanh_inv', 2), 4) == [0, 2, 6, 10]

    def test_quadratic(self):
        d = quadratic_descriptor(1, [], [2])  # sqrt(2)
        assert d.is_quadratic
        assert first_quotients(d, 5) == [1, 2, 2, 2, 2]
        assert first_quotients(builtin_descriptor('all_ones'), 5) == [1] * 5

    def test_invalid_parameters(self):
        with pytest.raises(DescriptorError):
            builtin_descriptor('exp_inv', 1)
        with pytest.raises(DescriptorError):
            builtin_descriptor('exp_inv')
        with pytest.raises(DescriptorError):
            builtin_descriptor('exp_2_over', 0)
        with pytest.raises(DescriptorError):
            builtin_descriptor('pi', 3)


class TestDescriptorValidation:

    def test_const_must_be_positive(self):
        with pytest.raises(DescriptorError):
            Const(0)

    def test_progression_needs_growth(self):
        with pytest.raises(DescriptorError):
            Progression.linear(-1, 5)
        with pytest.raises(DescriptorError):
            Progression((Fraction(3),))

    def test_progression_must_start_positive(self):
        with pytest.raises(DescriptorError):
            HurwitzianDescriptor(1, (), (Progression.linear(1, -3),), 1)

    def test_quadratic_dipping_past_first_values(self):
        dips = Progression((Fraction(35), Fraction(-12), Fraction(1)))
        assert [dips.value(j) for j in range(1, 5)] == [24, 15, 8, 3]
        assert dips.root_bound() == 36
        with pytest.raises(DescriptorError):
            HurwitzianDescriptor(1, (), (dips,), 1)
        HurwitzianDescriptor(1, (), (dips,), 8)
        HurwitzianDescriptor(1, (), (Progression((Fraction(37), Fraction(-12), Fraction(1))),), 1)

    def test_progression_must_be_integer_valued(self):
        with pytest.raises(DescriptorError):
            HurwitzianDescriptor(1, (), (Progression((Fraction(0), Fraction(1, 2))),), 1)

    def test_empty_cycle(self):
        with pytest.raises(DescriptorError):
            HurwitzianDescriptor(1, (), (), 1)

    def test_negative_index(self):
        with pytest.raises(ValueError):
            partial_quotient(builtin_descriptor('e'), -1)


class TestParseDescriptor:

    def test_pattern_for_e(self):
        d = parse_descriptor("2;;1,2j,1")
        assert first_quotients(d, 12) == first_quotients(builtin_descriptor('e'), 12)

    def test_two_part_form(self):
        d = parse_descriptor("1; 4j-3, 1, 1")
        assert first_quotients(d, 10) == first_quotients(builtin_descriptor('exp_inv', 2), 10)

    def test_preperiod_and_polynomial(self):
        d = parse_descriptor("0; 5, 7; (j^2+j)/2")
        assert d.preperiod == (5, 7)
        assert d.cycle[0].degree == 2
        assert first_quotients(d, 6) == [0, 5, 7, 1, 3, 6]

    def test_constant_entries(self):
        d = parse_descriptor("1;;2")
        assert d.is_quadratic
        assert d.cycle == (Const(2),)

    def test_bad_patterns(self):
        for text in ("nonsense", "1;;0", "1;;j/2", "x;;1", "1;;sin(j)"):
            with pytest.raises(DescriptorError):
                parse_descriptor(text)


class TestIndexing:

    def test_cycle_position(self):
        e = builtin_descriptor('e')
        assert cycle_position(e, 1) == (0, 1)
        assert cycle_position(e, 5) == (1, 2)
        assert leaping_offsets(e) == [1]

    def test_leaping_indices(self):
        e = builtin_descriptor('e')
        assert [i for i in range(12) if is_leaping_index(e, i)] == [1, 4, 7, 10]
        d = builtin_descriptor('exp_inv', 5)
        assert [i for i in range(12) if is_leaping_index(d, i)] == [0, 3, 6, 9]
        pre = parse_descriptor("1; 3; 2j, 1")
        assert not is_leaping_index(pre, 0)
        assert is_leaping_index(pre, 1)


class TestConvergents:

    def test_seeds(self):
        d = builtin_descriptor('exp_inv', 4)
        assert convergent(d, -1).pair == (1, 0)
        assert convergent(d, -2).pair == (0, 1)
        with pytest.raises(ValueError):
            convergent(d, -3)

    def test_e_values(self):
        e = builtin_descriptor('e')
        assert convergent(e, 2).pair == (8, 3)
        assert convergent(e, 5).pair == (87, 32)
        denominators = [c.q for c in islice(convergents(e), 1, 17)]
        assert denominators == [1, 1, 3, 4, 7, 32, 39, 71, 465, 536, 1001, 8544, 9545, 18089, 190435, 208524]

    def test_generator_matches_cached_lookup(self):
        d = builtin_descriptor('exp_2_over', 5)
        for c in islice(convergents(d), 150):
            assert convergent(d, c.index) == c

    @given(st.integers(min_value=2, max_value=30), st.integers(min_value=0, max_value=80))
    @settings(max_examples=60, deadline=None)
    def test_determinant(self, s, i):
        d = builtin_descriptor('exp_inv', s)
        cur, prev = convergent(d, i), convergent(d, i - 1)
        assert cur.p * prev.q - prev.p * cur.q == (-1) ** (i + 1)


class TestRationalInterval:

    def test_arithmetic(self):
        a = RationalInterval(Fraction(1), Fraction(2))
        b = RationalInterval(Fraction(-1), Fraction(3))
        assert a + b == RationalInterval(Fraction(0), Fraction(5))
        assert 1 + a == RationalInterval(Fraction(2), Fraction(3))
        assert a - b == RationalInterval(Fraction(-2), Fraction(3))
        assert 1 - a == RationalInterval(Fraction(-1), Fraction(0))
        assert a * b == RationalInterval(Fraction(-2), Fraction(6))
        assert a * -2 == RationalInterval(Fraction(-4), Fraction(-2))
        assert abs(b) == RationalInterval(Fraction(0), Fraction(3))
        assert a.reciprocal() == RationalInterval(Fraction(1, 2), Fraction(1))

    def test_queries(self):
        a = RationalInterval(Fraction(1), Fraction(2))
        assert a.width == 1
        assert a.midpoint == Fraction(3, 2)
        assert a.contains(Fraction(2))
        assert not a.contains(Fraction(5, 2))
        assert a.overlaps(RationalInterval(Fraction(2), Fraction(9)))
        assert not a.overlaps(RationalInterval.point(3))

    def test_invalid(self):
        with pytest.raises(ValueError):
            RationalInterval(Fraction(2), Fraction(1))
        with pytest.raises(ZeroDivisionError):
            RationalInterval(Fraction(-1), Fraction(1)).reciprocal()

    @given(st.fractions(), st.fractions(), st.fractions(), st.fractions())
    @settings(max_examples=100)
    def test_product_encloses_products(self, a, b, c, d):
        x, y = RationalInterval.hull(a, b), RationalInterval.hull(c, d)
        product = x * y
        for u in (a, b):
            for v in (c, d):
                assert product.contains(u * v)


class TestEvalInterval:

    def test_e_to_fifty_digits(self):
        interval = eval_interval(builtin_descriptor('e'), 200)
        # factorial series: sum_{k<=60} 1/k! < e < that + 2/61!
        partial = sum(Fraction(1, math.factorial(k)) for k in range(61))
        assert interval.hi >= partial
        assert interval.lo <= partial + Fraction(2, math.factorial(61))
        assert interval.width < Fraction(1, 2 ** 200)
        with mpmath.workdps(80):
            assert to_mpf(interval.lo) <= mpmath.e <= to_mpf(interval.hi)

    def test_golden_ratio(self):
        interval = eval_interval(builtin_descriptor('all_ones'), 100)
        assert interval.lo ** 2 - interval.lo - 1 <= 0 <= interval.hi ** 2 - interval.hi - 1
        assert interval.width < Fraction(1, 2 ** 100)

    def test_other_builtins(self):
        with mpmath.workdps(40):
            for kind, param, expected in (
                ('exp_inv', 3, mpmath.exp(mpmath.mpf(1) / 3)),
                ('exp_2_over', 5, mpmath.exp(mpmath.mpf(2) / 5)),
                ('e_squared', None, mpmath.exp(2)),
                ('tanh_inv', 2, mpmath.tanh(mpmath.mpf(1) / 2)),
            ):
                interval = eval_interval(builtin_descriptor(kind, param), 100)
                assert to_mpf(interval.lo) <= expected <= to_mpf(interval.hi), kind

    @given(st.lists(st.integers(min_value=1, max_value=50), min_size=1, max_size=4),
           st.integers(min_value=8, max_value=300))
    @settings(max_examples=40, deadline=None)
    def test_width_contract(self, period, precision):
        d = quadratic_descriptor(1, [], period)
        assert eval_interval(d, precision).width < Fraction(1, 2 ** precision)

    def test_precision_must_be_positive(self):
        with pytest.raises(ValueError):
            eval_interval(builtin_descriptor('e'), 0)


class TestMu:

    def test_e_first_index(self):
        interval = mu(builtin_descriptor('e'), 1, 100)
        with mpmath.workdps(40):
            expected = 1 / abs(mpmath.e - 3)
            assert abs(to_mpf(interval.midpoint) - expected) < mpmath.mpf(10) ** -25

    def test_golden_ratio_tends_to_sqrt5(self):
        interval = mu(builtin_descriptor('all_ones'), 60, 100)
        assert abs(float(interval.midpoint) - math.sqrt(5)) < 1e-12

    def test_identity_with_convergent_error(self):
        d = builtin_descriptor('exp_inv', 2)
        with mpmath.workdps(60):
            theta = mpmath.exp(mpmath.mpf(1) / 2)
            for i in range(1, 20):
                c = convergent(d, i)
                product = c.q * abs(c.q * theta - c.p)
                assert abs(product * to_mpf(mu(d, i, 150).midpoint) - 1) < mpmath.mpf(10) ** -30

    def test_range(self):
        for d in (builtin_descriptor('e'), builtin_descriptor('exp_2_over', 3)):
            for i in range(1, 40):
                b = partial_quotient(d, i + 1)
                interval = mu(d, i, 64)
                assert b < interval.lo and interval.hi < b + 2

    def test_invalid(self):
        with pytest.raises(ValueError):
            mu(builtin_descriptor('e'), -1, 64)


class TestMuLimit:

    def test_exp_inv(self):
        d = builtin_descriptor('exp_inv', 7)
        assert mu_limit(d, 0) == math.inf
        assert mu_limit(d, 1) == 2
        assert mu_limit(d, 2) == 2

    def test_e(self):
        e = builtin_descriptor('e')
        assert [mu_limit(e, k) for k in range(3)] == [2, math.inf, 2]

    def test_exp_2_over_odd(self):
        d = builtin_descriptor('exp_2_over', 3)
        assert mu_limit(d, 3) == 2
        assert mu_limit(d, 4) == 2
        assert all(mu_limit(d, k) == math.inf for k in range(3))

    def test_larger_constants(self):
        d = parse_descriptor("1;;2j,2,3")
        # [2; 3], and [3] + [0; 2]
        assert mu_limit(d, 1) == Fraction(7, 3)
        assert mu_limit(d, 2) == Fraction(7, 2)

    def test_errors(self):
        with pytest.raises(DescriptorError):
            mu_limit(builtin_descriptor('all_ones'), 0)
        with pytest.raises(ValueError):
            mu_limit(builtin_descriptor('e'), 3)
