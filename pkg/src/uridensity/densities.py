"""Natural, logarithmic, iterated-Cesàro (Flehinger) and URI densities.

The first three are deterministic partial sums computed exactly or with
compensated summation; the URI density is a Monte Carlo average along
:class:`~uridensity.sampler.UriStream` replicas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from ._numeric import BLOCK, compensated_cumsum
from .errors import MemoryBudgetError, ParameterError
from .predicates import SetPredicate
from .rng import RngStream
from .sampler import DEFAULT_MAX_DIGITS, UriStream, bernoulli_sample

__all__ = [
    "DensityKind",
    "DensityEstimate",
    "FlehingerTable",
    "natural_partial",
    "log_partial",
    "flehinger_table",
    "uri_density_mc",
    "replica_means",
    "uri_log_gap",
    "DEFAULT_MEMORY_BUDGET",
]

DEFAULT_MEMORY_BUDGET = 1 << 30  # bytes
_CHUNK = 1 << 20
_EPS = np.finfo(np.float64).eps


class DensityKind(str, Enum):
    NATURAL_PARTIAL = "natural-partial"
    LOG_PARTIAL = "log-partial"
    HINF = "hinf"
    URI_MC = "uri-mc"
    LOCAL = "local"


@dataclass(frozen=True)
class DensityEstimate:
    """A density value with the size it was computed at and an error bound.

    ``error_bound`` is a standard error for Monte Carlo kinds and a
    worst-case truncation/rounding bound otherwise.
    """

    kind: DensityKind
    value: float
    size: int
    error_bound: float
    predicate_id: str = ""
    exact: Fraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.error_bound >= 0:
            raise ValueError(f"error_bound must be >= 0, got {self.error_bound}")
        # (1/ln n) * sum 1/j exceeds 1 at finite n, so log partials are exempt
        if self.kind is not DensityKind.LOG_PARTIAL and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.kind.value} value {self.value} outside [0, 1]")

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "value": self.value,
            "size": self.size,
            "error_bound": self.error_bound,
            "predicate": self.predicate_id,
        }
        if self.exact is not None:
            d["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        return d


def _chunks(lo: int, hi: int, size: int = _CHUNK) -> Iterator[tuple[int, int]]:
    for a in range(lo, hi + 1, size):
        yield a, min(hi, a + size - 1)


def natural_partial(A: SetPredicate, n: int) -> DensityEstimate:
    if n < 1:
        raise ParameterError("n must be >= 1")
    count = sum(int(A.indicator(a, b).sum()) for a, b in _chunks(1, n))
    exact = Fraction(count, n)
    return DensityEstimate(DensityKind.NATURAL_PARTIAL, count / n, n, 0.0, A.id, exact)


def log_partial(A: SetPredicate, n: int) -> DensityEstimate:
    """``(1/ln n) * sum_{j <= n, j in A} 1/j`` with a correctly rounded sum."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    parts = []
    for a, b in _chunks(1, n):
        js = np.flatnonzero(A.indicator(a, b)) + a
        parts.extend((1.0 / js).tolist())
    total = math.fsum(parts)
    ln = math.log(n)
    # each 1/j carries half an ulp of relative rounding error
    return DensityEstimate(DensityKind.LOG_PARTIAL, total / ln, n, float(2 * _EPS * total / ln), A.id)


@dataclass
class FlehingerTable:
    """Iterated Cesàro averages ``P_n^k``, ``1 <= n <= n_max``.

    ``rows`` maps ``k`` to the float array ``[P_1^k, ..., P_{n_max}^k]`` for
    every retained ``k``; ``error_bound`` bounds the float error of any entry.
    """

    predicate_id: str
    n_max: int
    k_max: int
    rows: dict[int, np.ndarray]
    error_bound: float

    def value(self, n: int, k: int) -> float:
        if k not in self.rows:
            raise KeyError(f"row k={k} not retained")
        return float(self.rows[k][n - 1])

    def row(self, k: int) -> np.ndarray:
        return self.rows[k]

    def decade_extremes(self, k: int, lo: int, hi: int) -> tuple[float, float]:
        """``(min, max)`` of ``P_n^k`` over ``lo <= n <= hi``."""
        seg = self.rows[k][lo - 1:hi]
        return float(seg.min()), float(seg.max())

    def iter_rows(self, ns: Iterable[int] | None = None) -> Iterator[tuple[int, int, float]]:
        """``(n, k, value)`` triples in ``k``-major order."""
        for k in sorted(self.rows):
            r = self.rows[k]
            idx = range(1, self.n_max + 1) if ns is None else ns
            for n in idx:
                yield n, k, float(r[n - 1])


def flehinger_table(A: SetPredicate, n_max: int, k_max: int, keep: Iterable[int] | None = None,
                    memory_budget: int = DEFAULT_MEMORY_BUDGET) -> FlehingerTable:
    """``P_n^0 = 1_A(n)``, ``P_n^{k+1} = (1/n) sum_{j<=n} P_j^k``.

    Only the rows listed in ``keep`` are retained (all rows when ``keep`` is
    None); the iteration itself holds a single working row.
    """
    if n_max < 1 or k_max < 0:
        raise ParameterError("need n_max >= 1 and k_max >= 0")
    keep = set(range(k_max + 1)) if keep is None else {int(k) for k in keep}
    if any(k < 0 or k > k_max for k in keep):
        raise ParameterError(f"keep must lie in [0, {k_max}]")
    need = 8 * n_max * (len(keep) + 2)
    if need > memory_budget:
        raise MemoryBudgetError(f"table needs ~{need} bytes, budget is {memory_budget}")

    cur = np.empty(n_max, dtype=np.float64)
    for a, b in _chunks(1, n_max):
        cur[a - 1:b] = A.indicator(a, b)
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    rows = {0: cur.copy()} if 0 in keep else {}
    for k in range(1, k_max + 1):
        compensated_cumsum(cur, out=cur)
        cur /= ns  # division keeps k=1 entries correctly rounded
        np.clip(cur, 0.0, 1.0, out=cur)
        if k in keep:
            rows[k] = cur.copy()
    # per pass: blocked prefix sum, one carry add and one scaling rounding
    bound = k_max * (BLOCK + 4) * _EPS
    return FlehingerTable(A.id, n_max, k_max, rows, bound)


def _replica_stream(seed, r: int) -> RngStream:
    if isinstance(seed, RngStream):
        return RngStream(seed.seed, seed.stream_id + r)
    return RngStream(int(seed), r)


def replica_means(predicates: list[SetPredicate], n_elems: int, reps: int, seed=0,
                  max_digits: int | None = DEFAULT_MAX_DIGITS) -> np.ndarray:
    """Per-replica averages of ``1_A(N_k)`` over ``k <= n_elems``, shape ``(reps, len(predicates))``.

    Replica ``r`` uses stream ``(seed, r)`` (offset by the stream id when an
    :class:`RngStream` is passed).
    """
    if n_elems < 1 or reps < 1:
        raise ParameterError("n_elems and reps must be >= 1")
    members = [p.member for p in predicates]
    out = np.empty((reps, len(predicates)), dtype=np.float64)
    for r in range(reps):
        s = UriStream(_replica_stream(seed, r), max_digits=max_digits)
        hits = [0] * len(members)
        for _ in range(n_elems):
            n = s.__next__()
            for i, f in enumerate(members):
                if f(n):
                    hits[i] += 1
        out[r] = np.array(hits, dtype=np.float64) / n_elems
    return out


def summarize(means: np.ndarray, kind: DensityKind, size: int, pid: str) -> DensityEstimate:
    reps = means.size
    value = float(means.mean())
    se = float(means.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return DensityEstimate(kind, min(1.0, max(0.0, value)), size, se, pid)


def uri_density_mc(A: SetPredicate, n_elems: int, reps: int, seed=0,
                   max_digits: int | None = DEFAULT_MAX_DIGITS) -> DensityEstimate:
    """Mean over replicas of ``(1/n_elems) sum_k 1_A(N_k)`` with its standard error."""
    means = replica_means([A], n_elems, reps, seed, max_digits)[:, 0]
    return summarize(means, DensityKind.URI_MC, n_elems * reps, A.id)


def uri_log_gap(A: SetPredicate, n_max: int, rng: RngStream, log_value: float | None = None) -> float:
    """``| (1/|E_n|) sum_{j in E_n} 1_A(j) - (1/ln n) sum_{j<=n} 1_A(j)/j |`` for one sampled ``E_n``.

    ``log_value`` lets callers reuse a precomputed ``log_partial(A, n_max).value``.
    """
    if n_max < 10:
        raise ParameterError("n_max must be >= 10")
    if log_value is None:
        log_value = log_partial(A, n_max).value
    e = bernoulli_sample(n_max, rng)
    cond = sum(1 for j in e.members if A.member(j)) / len(e)
    return abs(cond - log_value)
