import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from uridensity import hinf as H
from uridensity.densities import flehinger_table
from uridensity.errors import ParameterError
from uridensity.predicates import all_integers, finite_set, leading_digit, residue_class
from uridensity.rng import RngStream
from uridensity.sampler import bernoulli_membership


def test_path_validation():
    H.BackwardChain(5, (5, 3, 3, 1))
    with pytest.raises(ValueError):
        H.BackwardChain(5, (6,))
    with pytest.raises(ValueError):
        H.BackwardChain(5, (3, 4))
    with pytest.raises(ParameterError):
        H.backward_sample(0, 1, RngStream(0))


def test_start_at_one_is_constant():
    assert H.backward_sample(1, 7, RngStream(0)).path == (1,) * 7


def test_sample_and_paths_are_backward_chains():
    rng = RngStream(1)
    p = H.backward_paths(50, 6, 1000, rng)
    assert p.min() >= 1 and p[:, 0].max() <= 50
    assert np.all(np.diff(p, axis=1) <= 0)
    c = H.backward_sample(50, 6, rng)
    assert len(c.path) == 6


def test_first_step_uniform():
    y1 = H.backward_paths(10, 1, 10**6, RngStream(2))[:, 0]
    freq = np.bincount(y1, minlength=11)[1:] / y1.size
    assert np.abs(freq - 0.1).max() < 0.005


def test_two_step_small_case():
    est = H.hinf_mc(finite_set([1]), 2, 2, 10**5, RngStream(3))
    assert abs(est.value - 0.75) <= 3 * est.error_bound


def test_all_integers_exact():
    est = H.hinf_mc(all_integers(), 1000, 3, 1000, RngStream(4))
    assert est.value == 1.0 and est.error_bound == 0.0


def test_strict_decrease():
    assert H.strict_decrease_prob(7, 1, 10, RngStream(5)) == 1.0
    p = H.strict_decrease_prob(2, 2, 10**5, RngStream(5))
    assert abs(p - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 10**5)
    seq = [H.strict_decrease_prob(n, 4, 10**5, RngStream(6, i)) for i, n in enumerate((10**2, 10**4, 10**6))]
    assert seq[0] < seq[1] < seq[2] < 1.0


def _chain_law(n, k):
    """Exact law of the k-th backward element as Fractions (index 1..n)."""
    c = [Fraction(0)] + [Fraction(1, n)] * n
    for _ in range(k - 1):
        nxt = [Fraction(0)] * (n + 1)
        acc = Fraction(0)
        for y in range(n, 0, -1):
            acc += c[y] / y
            nxt[y] = acc
        c = nxt
    return c


def _cesaro(indicator, n, k):
    row = [Fraction(int(indicator(j))) for j in range(1, n + 1)]
    for _ in range(k):
        s, out = Fraction(0), []
        for j, v in enumerate(row, 1):
            s += v
            out.append(s / j)
        row = out
    return row[-1]


@pytest.mark.parametrize("n,k", [(7, 1), (7, 3), (12, 2), (20, 4)])
def test_exact_identity(n, k):
    law = _chain_law(n, k)
    for A in (leading_digit(1), residue_class(3, 1), finite_set([1, 2, 5])):
        assert sum(law[y] for y in range(1, n + 1) if A.member(y)) == _cesaro(A.member, n, k)


@pytest.mark.parametrize("n", [100, 1000, 10**4])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_mc_matches_table(n, k):
    A = leading_digit(1)
    exact = flehinger_table(A, n, k, keep=[k]).value(n, k)
    est = H.hinf_mc(A, n, k, 10**5, RngStream(7, 10 * k + int(math.log10(n))))
    assert abs(est.value - exact) <= 3 * est.error_bound


def _conditional_laws(n, k):
    """Exact laws of the k-th largest element of E_n (step weights 1/(y-1)) and
    of the backward chain given strict decrease (weights 1/y), both normalized."""
    a = np.full(n + 1, 1.0 / n)
    b = a.copy()
    a[0] = b[0] = 0.0
    y = np.arange(n + 1, dtype=float)
    for _ in range(k - 1):
        wa = np.zeros(n + 1)
        wa[2:] = a[2:] / (y[2:] - 1)
        wb = np.zeros(n + 1)
        wb[1:] = b[1:] / y[1:]
        # mass moves strictly down: new(z) = sum_{y > z} w(y)
        a = np.concatenate([np.cumsum(wa[::-1])[::-1][1:], [0.0]])
        b = np.concatenate([np.cumsum(wb[::-1])[::-1][1:], [0.0]])
        a[0] = b[0] = 0.0
    return a / a.sum(), b / b.sum()


def test_conditional_laws_by_enumeration():
    n = 60
    a, b = _conditional_laws(n, 3)
    ea, eb = np.zeros(n + 1), np.zeros(n + 1)
    for y1 in range(3, n + 1):
        for y2 in range(2, y1):
            for y3 in range(1, y2):
                ea[y3] += 1 / ((y1 - 1) * (y2 - 1))
                eb[y3] += 1 / (y1 * y2)
    assert np.allclose(a, ea / ea.sum(), atol=1e-15)
    assert np.allclose(b, eb / eb.sum(), atol=1e-15)


def test_conditional_law_gap_shrinks():
    tv = [0.5 * np.abs(np.subtract(*_conditional_laws(n, 3))).sum() for n in (100, 1000, 10**4)]
    assert abs(tv[0] - 0.0446) < 5e-4
    assert tv[0] > tv[1] > tv[2] and tv[2] < 0.005


def test_conditional_law_monte_carlo():
    n, k, reps = 100, 3, 10**5
    law_y, law_t = _conditional_laws(n, k)
    # k-th largest element of Bernoulli-sampled E_n
    mem = bernoulli_membership(n, reps, RngStream(8, 0))[:, :n][:, ::-1]
    csum = np.cumsum(mem, axis=1)
    ok = csum[:, -1] >= k
    pos = np.argmax(csum[ok] >= k, axis=1)
    y = n - pos
    # backward chain conditioned on strict decrease
    p = H.backward_paths(n, k, reps, RngStream(8, 1))
    keep = np.all(np.diff(p, axis=1) < 0, axis=1)
    t = p[keep, -1]
    for sample, law in ((y, law_y), (t, law_t)):
        obs = np.bincount(sample, minlength=n + 1)[1:]
        e = law[1:] * sample.size
        big = e >= 5
        o2 = np.append(obs[big], obs[~big].sum())
        e2 = np.append(e[big], e[~big].sum())
        assert stats.chisquare(o2, e2).pvalue > 0.001
