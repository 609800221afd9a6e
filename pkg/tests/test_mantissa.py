import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uridensity.mantissa import (
    as_rational,
    benford_cdf,
    benford_digit_probability,
    exact_mantissa,
    exponent_of,
    mantissa_below,
    real_mantissa,
    real_mantissa_array,
)
from uridensity.rng import RngStream


def naive_exponent(n, b):
    e = 0
    while b ** (e + 1) <= n:
        e += 1
    return e


@pytest.mark.parametrize("n,b,e,m", [(123, 10, 2, Fraction(123, 100)), (5, 2, 2, Fraction(5, 4)),
                                     (10**40, 10, 40, Fraction(1)), (1, 7, 0, Fraction(1))])
def test_examples(n, b, e, m):
    x = exact_mantissa(n, b)
    assert x.exponent_e == e and x.mantissa == m


def test_invalid_inputs():
    with pytest.raises(ValueError):
        exact_mantissa(5, 1)
    with pytest.raises(ValueError):
        exact_mantissa(0, 10)


@given(st.integers(min_value=1, max_value=10**120), st.integers(min_value=2, max_value=40))
@settings(max_examples=500, deadline=None)
def test_exponent_matches_power_loop(n, b):
    assert exponent_of(n, b) == naive_exponent(n, b)


@given(st.integers(min_value=1, max_value=400), st.integers(min_value=2, max_value=37))
@settings(max_examples=300, deadline=None)
def test_exponent_at_power_boundaries(p, b):
    for n in (b**p - 1, b**p, b**p + 1):
        assert exponent_of(n, b) == naive_exponent(n, b) if p < 60 else exponent_of(n, b) == (
            p if n >= b**p else p - 1)


def test_threshold_examples():
    assert mantissa_below(exact_mantissa(123), 2)
    assert not mantissa_below(exact_mantissa(9999), Fraction(9999, 1000))
    assert mantissa_below(exact_mantissa(2**64), 1.85)
    assert mantissa_below(exact_mantissa(9999), Fraction(9999, 1000), strict=False)


def test_floats_are_read_as_decimals():
    assert as_rational(1.85) == Fraction(37, 20)
    assert as_rational("3/2") == Fraction(3, 2)
    with pytest.raises(ValueError):
        as_rational(float("nan"))


def test_threshold_cross_evaluation_against_fractions():
    # 1e5 random n up to 1e100, compared with an independent Fraction computation
    rng = RngStream(99)
    thresholds = [Fraction(3, 2), Fraction(2), Fraction(314159, 100000), Fraction(9, 1), Fraction(10)]
    mismatches = 0
    for i in range(100000):
        n = rng.below(10**100) + 1 if i % 2 else rng.below(10 ** (1 + i % 99)) + 1
        t = thresholds[i % len(thresholds)]
        m = exact_mantissa(n)
        s = len(str(n)) - 1
        mismatches += mantissa_below(m, t) != (Fraction(n, 10**s) < t)
    assert mismatches == 0


@given(st.integers(min_value=1, max_value=2**52), st.sampled_from([2, 3, 7, 10, 16]))
@settings(max_examples=1000, deadline=None)
def test_real_and_exact_agree(n, b):
    exact = float(exact_mantissa(n, b).mantissa)
    assert math.isclose(real_mantissa(float(n), b), exact, rel_tol=1e-10)


@given(st.integers(min_value=1, max_value=10**60), st.integers(min_value=1, max_value=30))
@settings(max_examples=300, deadline=None)
def test_scale_invariance(n, k):
    m = exact_mantissa(n, 10)
    assert exact_mantissa(n * 10**k, 10).mantissa == m.mantissa
    assert m.shifted(k).mantissa == m.mantissa


def test_real_mantissa_examples():
    assert real_mantissa(2.5) == 2.5
    assert real_mantissa(0.1) == 1.0
    x = np.nextafter(10.0, 0.0)
    assert 1.0 <= real_mantissa(x) < 10.0
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            real_mantissa(bad)


@given(st.floats(min_value=1e-300, max_value=1e300), st.sampled_from([2, 3, 10, 60]))
@settings(max_examples=1000, deadline=None)
def test_real_mantissa_range(x, b):
    m = real_mantissa(x, b)
    assert 1.0 <= m < b


def test_real_mantissa_array_matches_scalar():
    rng = RngStream(6)
    u = rng.uniforms(5000, open_interval=True)
    x = np.concatenate([u * 10.0 ** rng.below(50), np.nextafter(10.0 ** np.arange(-20, 20), 0), 10.0 ** np.arange(-20, 20)])
    arr = real_mantissa_array(x)
    assert arr.min() >= 1.0 and arr.max() < 10.0
    # the paths round differently just below a power of b, where 9.999... and 1.0
    # are neighbours on the log circle; compare log10 mantissae modulo 1
    d = np.abs(np.log10(arr) - np.log10([real_mantissa(v) for v in x]))
    assert np.minimum(d, 1.0 - d).max() < 1e-14


def test_benford_values():
    assert benford_cdf(1) == 0.0
    assert benford_cdf(10) == 1.0
    assert abs(benford_cdf(2) - 0.3010299957) < 1e-10
    assert abs(sum(benford_digit_probability(d) for d in range(1, 10)) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        benford_cdf(11)


def test_leading_digit_of_huge_integer():
    assert exact_mantissa(2**10000).leading_digit() == int(str(2**10000)[0])
