import math

import numpy as np
import pytest

from uridensity import local
from uridensity.errors import ElementSizeError, ParameterError
from uridensity.rng import RngStream
from uridensity.sampler import (
    FiniteUriSet,
    UriStream,
    bernoulli_membership,
    bernoulli_sample,
    compose_order2,
    next_gap,
    stream_next,
)

TWO64 = 1 << 64


def test_bernoulli_trivial_and_invalid():
    assert bernoulli_sample(1, RngStream(0)).members == (1,)
    with pytest.raises(ParameterError):
        bernoulli_sample(0, RngStream(0))
    with pytest.raises(ValueError):
        FiniteUriSet(5, (2, 3))


def test_membership_of_two():
    mem = bernoulli_membership(2, 10**6, RngStream(1))
    assert abs(mem[:, 1].mean() - 0.5) < 0.002


def test_membership_pairs_independent():
    mem = bernoulli_membership(3, 10**6, RngStream(2))
    both = (mem[:, 1] & mem[:, 2]).mean()
    se = math.sqrt((1 / 6) * (5 / 6) / 10**6)
    assert abs(both - 1 / 6) < 3 * se


def test_mean_size_is_harmonic_number():
    n, reps = 10**4, 400
    sizes = [len(bernoulli_sample(n, RngStream(3, r))) for r in range(reps)]
    h = math.fsum(1.0 / j for j in range(1, n + 1))
    assert abs(h - 9.787606036044348) < 1e-12
    se = np.std(sizes, ddof=1) / math.sqrt(reps)
    assert abs(np.mean(sizes) - h) < 4 * se


def test_size_over_log_n():
    n = 10**6
    ratios = [len(bernoulli_sample(n, RngStream(4, r))) / math.log(n) for r in range(20)]
    assert 0.98 <= np.mean(ratios) <= 1.10


def test_uniform_maximum():
    mem = bernoulli_membership(10, 10**6, RngStream(5))
    top = 10 - np.argmax(mem[:, ::-1], axis=1)
    freq = np.bincount(top, minlength=11)[1:] / 10**6
    assert np.abs(freq - 0.1).max() < 0.005


def test_sample_matches_membership_law():
    # bernoulli_sample and bernoulli_membership use the same coin
    a = bernoulli_sample(50, RngStream(6))
    b = bernoulli_membership(50, 1, RngStream(6))[0]
    assert list(a.members) == (np.flatnonzero(b) + 1).tolist()


def test_finite_set_helpers():
    e = FiniteUriSet(20, (1, 4, 9, 16))
    assert 9 in e and 10 not in e and 21 not in e
    assert e.max_upto(15) == 9 and e.max_upto(16) == 16 and e.max_upto(3) == 1


def test_gap_deterministic_example(scripted):
    # r / 2**64 = 0.6 -> ceil(1 / 0.6) = 2
    r = int(0.6 * TWO64)
    assert next_gap(1, scripted([r])) == 2


def test_gap_redraws_zero_and_ties(scripted):
    s = scripted([0, 1 << 63, 3 << 62])  # r = 0 rejected, r = 2**63 divides 2**64 exactly
    assert next_gap(1, s) == 2  # ceil(2**64 / (3 * 2**62)) = 2
    assert s.consumed == 3


def test_gap_law_exact_at_boundaries(scripted):
    # next = n iff r in [m 2**64 / n, m 2**64 / (n - 1)); take the smallest r with next = 3
    m = 1
    r = -(-m * TWO64 // 3)
    assert next_gap(m, scripted([r])) == 3
    assert next_gap(m, scripted([r - 1])) == 4


def test_gap_w_parameter():
    with pytest.raises(ParameterError):
        next_gap(1, RngStream(0), w=65)
    v = next_gap(5, RngStream(0), w=128)
    assert v > 5


def test_gap_tail_law():
    rng = RngStream(7)
    m, reps = 3, 200000
    draws = np.array([next_gap(m, rng) for _ in range(reps)])
    assert draws.min() > m
    for n in (4, 6, 30, 300):
        p = (draws > n).mean()
        assert abs(p - m / n) < 4 * math.sqrt((m / n) * (1 - m / n) / reps)


def test_gap_law_matches_bernoulli_beyond_m():
    # TV between next_gap(m) and the first Bernoulli member after m, m = 10
    m, reps = 10, 10**5
    rng = RngStream(8)
    g = np.array([next_gap(m, rng) for _ in range(reps)])
    mem = bernoulli_membership(m + 100, reps, RngStream(9))[:, m:]
    first = np.where(mem.any(axis=1), mem.argmax(axis=1) + m + 1, m + 101)
    hg = np.bincount(np.minimum(g, m + 101) - m - 1, minlength=101) / reps
    hb = np.bincount(first - m - 1, minlength=101) / reps
    assert 0.5 * np.abs(hg - hb).sum() < 0.02


def test_stream_first_elements():
    s = UriStream(RngStream(1))
    assert stream_next(s) == 1
    assert s.index == 1
    xs = s.take(100)
    assert all(b > a for a, b in zip([1] + xs, xs))


def test_stream_determinism():
    a = UriStream(RngStream(123, 4)).take(300)
    b = UriStream(RngStream(123, 4)).take(300)
    assert a == b
    assert a != UriStream(RngStream(123, 5)).take(300)


def test_second_element_law():
    reps = 10**5
    rng = RngStream(10)
    n2 = np.array([next_gap(1, rng) for _ in range(reps)])
    for n, p in ((2, 0.5), (5, 1 / 20)):
        assert abs((n2 == n).mean() - p) < 4 * math.sqrt(p * (1 - p) / reps)


def test_element_size_cap():
    s = UriStream(RngStream(0), max_digits=3)
    with pytest.raises(ElementSizeError):
        s.take(200)


def test_advance_to():
    s = UriStream(RngStream(11))
    v = s.advance_to(20)
    assert s.index == 20
    assert v == UriStream(RngStream(11)).take(20)[-1]


def test_compose_order2_first_and_second():
    assert compose_order2(1, 2, 1) == 1
    # inner second element K >= 2; outer is advanced to its K-th element
    inner = UriStream(RngStream(2, 1)).take(2)[-1]
    outer = UriStream(RngStream(1, 0)).take(inner)[-1]
    assert compose_order2(1, 2, 2) == outer


def test_compose_order2_cap():
    with pytest.raises(ElementSizeError):
        compose_order2(1, 2, 40, max_index=3)


def test_composed_index_law_matches_dp_row():
    k, reps = 3, 40000
    ks = np.array([UriStream(RngStream(12, r)).take(k)[-1] for r in range(reps)])
    row = local.pmf_row(k, 60)
    emp = np.bincount(np.minimum(ks, 61), minlength=62)[1:61] / reps
    assert 0.5 * np.abs(emp - row.values[1:]).sum() < 0.03
