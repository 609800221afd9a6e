"""Exact law of the k-th URI element, ``P_k(n) = P(N_k = n)``.

Rows follow the two-term recursion

    P_k(n) = (n-2)/n * P_k(n-1) + 1/n * P_{k-1}(n-1),

which telescopes to ``n(n-1) P_k(n) = sum_{j<n} j P_{k-1}(j)``; rows are built
from that prefix sum (compensated) in chunks, so a row of length 10**7 needs a
single float64 buffer.  Doubles are safe for ``k <= 30`` at desk-scale
truncations: entries near the mode stay far above underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from ._numeric import accurate_sum, compensated_cumsum
from .densities import DensityEstimate, DensityKind
from .errors import ParameterError
from .predicates import SetPredicate

__all__ = [
    "PmfRow",
    "pmf_initial",
    "pmf_step",
    "pmf_rows",
    "pmf_row",
    "pmf_explicit",
    "local_probability",
    "renormalized",
    "mode_and_unimodality",
    "f_ratio",
    "f_ratio_bounds",
    "f_ratio_check",
    "count_tail_probability",
    "write_pmf_csv",
]

_CHUNK = 1 << 16
_TINY = 1e-290


@dataclass(frozen=True)
class PmfRow:
    """``values[n] = P_k(n)`` for ``1 <= n <= n_trunc``; ``values[0]`` is padding."""

    k: int
    n_trunc: int
    values: np.ndarray
    tail_mass: float
    mass_residual: float  # raw 1 - sum, may be slightly negative from rounding

    def p(self, n: int) -> float:
        return float(self.values[n]) if 1 <= n <= self.n_trunc else float("nan")

    @property
    def mass(self) -> float:
        return 1.0 - self.mass_residual


def _finish(k: int, values: np.ndarray) -> PmfRow:
    values.setflags(write=False)
    residual = 1.0 - accurate_sum(values)
    return PmfRow(k, values.size - 1, values, max(0.0, residual), residual)


def pmf_initial(n_trunc: int) -> PmfRow:
    if n_trunc < 1:
        raise ParameterError("n_trunc must be >= 1")
    v = np.zeros(n_trunc + 1, dtype=np.float64)
    v[1] = 1.0
    return _finish(1, v)


def _advance(v: np.ndarray) -> None:
    """In place: row ``k`` -> row ``k + 1``."""
    n_trunc = v.size - 1
    s = 0.0
    c = 0.0
    carry_in = float(v[1])
    for a in range(1, n_trunc, _CHUNK):
        b = min(n_trunc - 1, a + _CHUNK - 1)   # j = a..b feeds n = a+1..b+1
        j = np.arange(a, b + 1, dtype=np.float64)
        y = j * v[a:b + 1]
        y[0] = a * carry_in                    # v[a] may already hold the new row
        if b + 1 <= n_trunc:
            carry_in = float(v[b + 1])
        pref = compensated_cumsum(y)
        total = float(pref[-1])
        pref += s + c
        n = j + 1.0
        v[a + 1:b + 2] = pref / (n * j)
        t = s + total
        if abs(s) >= abs(total):
            c += (s - t) + total
        else:
            c += (total - t) + s
        s = t
    v[1] = 0.0


def pmf_step(prev: PmfRow) -> PmfRow:
    v = prev.values.copy()
    _advance(v)
    return _finish(prev.k + 1, v)


def pmf_rows(k_max: int, n_trunc: int) -> Iterator[PmfRow]:
    """Rows ``k = 1, ..., k_max``; each yielded row owns its array."""
    row = pmf_initial(n_trunc)
    yield row
    for _ in range(2, k_max + 1):
        row = pmf_step(row)
        yield row


def pmf_row(k: int, n_trunc: int) -> PmfRow:
    """Row ``k`` alone, computed in one reused buffer."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    v = np.zeros(n_trunc + 1, dtype=np.float64)
    v[1] = 1.0
    for _ in range(k - 1):
        _advance(v)
    return _finish(k, v)


def pmf_explicit(k: int, n: int, exact: bool = False):
    """``e_{k-2}(1, 1/2, ..., 1/(n-2)) / (n(n-1))`` by the one-pass symmetric-function DP.

    With ``exact=True`` the result is a :class:`Fraction`.
    """
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got k={k}, n={n}")
    if n > 10_000:
        raise ParameterError("explicit formula limited to n <= 10**4")
    order = k - 2
    one = Fraction(1) if exact else 1.0
    e = [one] + [0 * one] * order
    for j in range(1, n - 1):
        x = Fraction(1, j) if exact else 1.0 / j
        for r in range(min(j, order), 0, -1):
            e[r] += x * e[r - 1]
    return e[order] / (n * (n - 1))


def local_probability(row: PmfRow, A: SetPredicate) -> DensityEstimate:
    """``P(N_k in A)`` over the truncated support; ``error_bound`` is the tail mass."""
    parts = []
    for a in range(1, row.n_trunc + 1, _CHUNK * 16):
        b = min(row.n_trunc, a + _CHUNK * 16 - 1)
        mask = A.indicator(a, b)
        parts.append(float(row.values[a:b + 1][mask].sum()))
    value = min(1.0, max(0.0, math.fsum(parts)))
    return DensityEstimate(DensityKind.LOCAL, value, row.n_trunc, row.tail_mass, A.id)


def renormalized(est: DensityEstimate, row: PmfRow) -> float:
    """Estimate conditioned on ``N_k <= n_trunc``."""
    return est.value / (1.0 - row.tail_mass)


def mode_and_unimodality(row: PmfRow, tol: float = 1e-14) -> tuple[int, bool]:
    """First argmax ``n_k`` and whether the row rises to it and falls after it.

    ``tol`` is relative to the peak value.
    """
    v = row.values
    mode = int(np.argmax(v[1:])) + 1
    slack = tol * float(v[mode])
    d = np.diff(v[1:])
    rising = bool(np.all(d[:mode - 1] >= -slack))
    falling = bool(np.all(d[mode - 1:] <= slack))
    return mode, rising and falling


def f_ratio(k_max: int, n_max: int) -> np.ndarray:
    """Table ``F[k, n] = f_n(k) = P_{k-1}(n-1) / P_k(n-1)`` for ``2 <= k <= min(k_max, n-1)``.

    Entries outside that range, or whose denominator underflowed, are NaN.
    ``f_n(2) = 0`` by convention.
    """
    if k_max < 2 or n_max < 3:
        raise ParameterError("need k_max >= 2 and n_max >= 3")
    F = np.full((k_max + 1, n_max + 1), np.nan)
    prev = None
    for row in pmf_rows(k_max, n_max - 1):
        k = row.k
        if k >= 2:
            num = prev.values[1:n_max - 1 + 1]      # P_{k-1}(m), m = 1..n_max-1
            den = row.values[1:n_max - 1 + 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = num / den
            ns = np.arange(2, n_max + 1)            # n = m + 1
            ok = (ns - 1 >= k) & (den > _TINY) & ((num > _TINY) | (num == 0.0))
            F[k, 2:][ok] = ratio[ok]
            if k == 2:
                F[2, 3:] = 0.0
        prev = row
    return F


def f_ratio_bounds(k: int, n: int) -> tuple[float, float]:
    """Sandwich ``(k-2)/H_{n-3} <= f_n(k) <= (k-2)/sum_{k-2 <= j <= n-3} 1/j``."""
    if k == 2:
        return 0.0, 0.0
    lower = (k - 2) / math.fsum(1.0 / j for j in range(1, n - 2))
    upper = (k - 2) / math.fsum(1.0 / j for j in range(k - 2, n - 2))
    return lower, upper


def f_ratio_check(k_max: int, n_max: int, rel_tol: float = 1e-12) -> dict:
    """Check every finite entry of ``f_ratio(k_max, n_max)`` against its sandwich bounds.

    ``rel_tol`` absorbs rounding in the ratio and in the harmonic sums.
    """
    F = f_ratio(k_max, n_max)
    H = np.concatenate([[0.0], compensated_cumsum(1.0 / np.arange(1, n_max + 1, dtype=np.float64))])
    entries = undefined = violations = 0
    worst = 0.0
    for k in range(2, k_max + 1):
        ns = np.arange(k + 1, n_max + 1)
        if ns.size == 0:
            continue
        v = F[k, ns]
        ok = np.isfinite(v)
        undefined += int((~ok).sum())
        entries += int(ok.sum())
        if k == 2:
            lo = hi = np.zeros(ns.size)
        else:
            lo = (k - 2) / H[ns - 3]
            hi = (k - 2) / (H[ns - 3] - H[k - 3])
        excess = np.maximum(lo - v, v - hi)[ok]
        scale = np.maximum(1.0, hi[ok])
        violations += int((excess > rel_tol * scale).sum())
        if excess.size:
            worst = max(worst, float((excess / scale).max()))
    return {"k_max": k_max, "n_max": n_max, "entries": entries, "undefined": undefined,
            "bound_violations": violations, "max_relative_excess": worst}


def count_tail_probability(k: int, n: int) -> float:
    """``P(N_k > n) = P(|E_n| < k)`` in closed form, independent of the row recursion.

    ``P(|E_n| = m) = e_{m-1}(1, 1/2, ..., 1/(n-1)) / n``; the elementary
    symmetric sums come from power sums through Newton's identities, which is
    accurate for small ``k``.
    """
    if k < 1 or n < 1:
        raise ParameterError("need k, n >= 1")
    if k == 1:
        return 0.0
    inv = 1.0 / np.arange(1, n, dtype=np.float64)
    p = [0.0] + [accurate_sum(inv ** r) for r in range(1, k - 1)]
    e = [1.0]
    for j in range(1, k - 1):
        e.append(math.fsum((-1) ** (i - 1) * e[j - i] * p[i] for i in range(1, j + 1)) / j)
    return math.fsum(e) / n


def write_pmf_csv(row: PmfRow, fh, ns=None) -> None:
    """CSV ``n,p,tail_bound`` preceded by a ``# k=..,tail_mass=..`` comment line."""
    fh.write(f"# k={row.k},n_trunc={row.n_trunc},tail_mass={row.tail_mass!r}\n")
    fh.write("n,p,tail_bound\n")
    tail = repr(row.tail_mass)
    idx = range(1, row.n_trunc + 1) if ns is None else ns
    for n in idx:
        fh.write(f"{n},{float(row.values[n])!r},{tail}\n")
