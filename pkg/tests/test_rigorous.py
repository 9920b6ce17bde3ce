from __future__ import annotations

from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, strategies as st

from fibtower.rigorous import RInterval, decimal_string, enclosure_strings, neg, next_up

fracs = st.fractions(min_value=-100, max_value=100, max_denominator=1000)


@given(fracs, fracs)
def test_arithmetic_encloses_exact(x, y):
    a, b = RInterval(x, x, 80), RInterval(y, y, 80)
    for iv, exact in ((a + b, x + y), (a - b, x - y), (a * b, x * y)):
        assert iv.lo <= gmpy2.mpq(exact) <= iv.hi
    if y != 0:
        q = a / b
        assert q.lo <= gmpy2.mpq(x / y) <= q.hi


def test_fraction_conversion_is_outward():
    iv = RInterval(Fraction(1, 3), Fraction(1, 3), 64)
    assert iv.lo < gmpy2.mpq(1, 3) < iv.hi


def test_division_by_interval_with_zero():
    with pytest.raises(ZeroDivisionError):
        RInterval(1, 1, 64) / RInterval(-1, 1, 64)


def test_negation_keeps_high_precision():
    x = gmpy2.mpfr("0.1", 300)
    assert neg(neg(x)) == x
    assert (-RInterval(x, x, 300)).lo == neg(x)


def test_next_up_is_one_ulp():
    x = gmpy2.mpfr(1, 100)
    assert next_up(x, 100) > x


def test_sign_and_order():
    a, b = RInterval(1, 2, 64), RInterval(3, 4, 64)
    assert a.precedes(b) and not b.precedes(a)
    assert RInterval(-1, 1, 64).sign() == 0
    assert abs(RInterval(-3, 2, 64)).hi == 3


def test_pow_log_exp():
    x = RInterval(Fraction(3, 2), Fraction(3, 2), 100)
    assert (x ** 3).contains(gmpy2.mpfr("3.375"))
    assert x.log().exp().contains(gmpy2.mpfr("1.5", 100))


def test_decimal_strings_round_outward():
    iv = RInterval(Fraction(2, 3), Fraction(2, 3), 100)
    lo, hi = enclosure_strings(iv, 10)
    assert float(lo) < 2 / 3 < float(hi)
    assert decimal_string(gmpy2.mpfr(0), 5) == "0"
