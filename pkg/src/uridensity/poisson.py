"""The Poisson process with intensity ``1/x`` and its coupling to URI-sets.

In log coordinates the process is a unit-rate Poisson process, so a sample on
``(a, b]`` is either "count ~ Poisson(ln(b/a)), then place points at
``a (b/a)**V``" or "exponential gaps from ``ln a`` until ``ln b``, then
exponentiate".  Both are provided; the tests check they agree in law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import RngStream
from .sampler import FiniteUriSet

__all__ = [
    "LogPoissonSample",
    "poisson_variate",
    "sample_process",
    "derive_uri",
    "cell_counts",
    "double_occupancy_term",
    "double_occupancy_terms",
    "double_occupancy_series",
    "product_uniform_points",
    "product_uniform_log",
]

_POISSON_SPLIT = 30.0


@dataclass(frozen=True)
class LogPoissonSample:
    a: float
    b: float
    points: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.points)

    def count_in(self, lo: float, hi: float) -> int:
        """Number of points in ``(lo, hi]``."""
        p = self.points
        return int(np.searchsorted(p, hi, side="right") - np.searchsorted(p, lo, side="right"))


def poisson_variate(lam: float, rng: RngStream) -> int:
    """Poisson(``lam``) by CDF inversion, splitting large means into pieces."""
    if lam < 0 or not math.isfinite(lam):
        raise ParameterError(f"bad Poisson mean {lam}")
    total = 0
    while lam > _POISSON_SPLIT:
        total += poisson_variate(_POISSON_SPLIT, rng)
        lam -= _POISSON_SPLIT
    u = rng.random_open()
    p = math.exp(-lam)
    cdf = p
    k = 0
    while u > cdf and p > 0.0:
        k += 1
        p *= lam / k
        cdf += p
    return total + k


def sample_process(a: float, b: float, rng: RngStream, method: str = "count") -> LogPoissonSample:
    """Points of the intensity-``1/x`` process in ``(a, b]``, sorted.

    ``method="count"`` draws the count first; ``method="gaps"`` walks
    exponential gaps in log space.
    """
    if not (0 < a < b) or not math.isfinite(b):
        raise ParameterError(f"need 0 < a < b < inf, got ({a}, {b})")
    la, lb = math.log(a), math.log(b)
    if method == "count":
        n = poisson_variate(lb - la, rng)
        v = rng.uniforms(n, open_interval=True) if n else np.empty(0)
        pts = np.sort(np.exp(la + (lb - la) * v))
        pts = np.clip(pts, np.nextafter(a, b), b)
        return LogPoissonSample(a, b, tuple(pts.tolist()))
    if method == "gaps":
        pts = []
        s = la + rng.exponential()
        while s <= lb:
            pts.append(min(b, math.exp(s)))
            s += rng.exponential()
        return LogPoissonSample(a, b, tuple(pts))
    raise ParameterError(f"unknown method {method!r}")


def derive_uri(sample: LogPoissonSample, n_max: int | None = None) -> FiniteUriSet:
    """Integers whose cell ``(n-1, n]`` holds a point; 1 is always included.

    The cell ``(0, 1]`` has infinite mass, so membership of 1 is forced.
    """
    if sample.a > 1.0:
        raise ParameterError("sample must start at 1 to cover every cell")
    n_max = int(math.floor(sample.b)) if n_max is None else int(n_max)
    if n_max > sample.b:
        raise ParameterError(f"sample only covers (1, {sample.b}]")
    members = [1]
    for x in sample.points:
        n = math.ceil(x)
        if n > n_max:
            break
        if n != members[-1]:
            members.append(n)
    return FiniteUriSet(n_max, tuple(members))


def cell_counts(sample: LogPoissonSample, lo: int, hi: int) -> np.ndarray:
    """Point counts for the cells ``(n-1, n]``, ``n = lo+1, ..., hi``."""
    p = np.asarray(sample.points)
    cells = np.ceil(p[(p > lo) & (p <= hi)]).astype(np.int64)
    return np.bincount(cells - (lo + 1), minlength=hi - lo)


def double_occupancy_term(n: int) -> float:
    """``P(cell (n-1, n] holds >= 2 points)``; equals 1 for ``n = 1``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if n == 1:
        return 1.0
    return float(double_occupancy_terms(np.array([n]))[0])


def double_occupancy_terms(ns: np.ndarray) -> np.ndarray:
    """Vectorised terms ``1/n + (1 - 1/n) ln(1 - 1/n)`` for ``n >= 2``.

    Uses ``sum_{j>=2} x**j / (j(j-1))`` with ``x = 1/n`` when ``x`` is small.
    """
    x = 1.0 / np.asarray(ns, dtype=np.float64)
    direct = x + (1.0 - x) * np.log1p(-x)
    series = np.zeros_like(x)
    xp = x * x
    for j in range(2, 12):
        series += xp / (j * (j - 1))
        xp = xp * x
    return np.where(x < 0.01, series, direct)


def double_occupancy_series(n_max: int) -> float:
    """Partial sum of the double-occupancy probabilities over ``n = 1..n_max``."""
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    parts = [1.0]
    for lo in range(2, n_max + 1, 1 << 20):
        hi = min(n_max, lo + (1 << 20) - 1)
        parts.extend(double_occupancy_terms(np.arange(lo, hi + 1)).tolist())
    return math.fsum(parts)


def product_uniform_points(k: int, rng: RngStream) -> np.ndarray:
    """``(Y_1, ..., Y_k)`` with ``Y_i = U_1 ... U_i`` (may underflow for large k)."""
    return np.exp(product_uniform_log(k, rng))


def product_uniform_log(k: int, rng: RngStream) -> np.ndarray:
    """``(ln Y_1, ..., ln Y_k)``; use this for long chains."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    return np.cumsum(np.log(rng.uniforms(k, open_interval=True)))
