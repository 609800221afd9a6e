"""Uniform random integer sets (URI-sets).

A URI-set ``E`` contains each ``n >= 1`` independently with probability
``1/n``.  Two samplers are provided:

* :func:`bernoulli_sample` flips every coin in ``{1, ..., n_max}``.  Slow but
  obviously correct; it is the oracle.
* :class:`UriStream` jumps from one element to the next with
  :func:`next_gap`, using ``P(next > n | last = m) = m / n``.  Elements grow
  like ``e**k`` so they are Python ints from the start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ElementSizeError, ParameterError
from .mantissa import _power
from .rng import RngStream

__all__ = [
    "DEFAULT_MAX_DIGITS",
    "DEFAULT_MAX_COMPOSED_INDEX",
    "FiniteUriSet",
    "bernoulli_sample",
    "bernoulli_membership",
    "next_gap",
    "UriStream",
    "stream_next",
    "compose_order2",
]

DEFAULT_MAX_DIGITS = 100_000
DEFAULT_MAX_COMPOSED_INDEX = 100_000
_CHUNK = 1 << 20
_LOG2_10 = math.log2(10)


@dataclass(frozen=True)
class FiniteUriSet:
    """``E_n = E ∩ {1, ..., n_max}`` as a sorted tuple."""

    n_max: int
    members: tuple[int, ...]

    def __post_init__(self):
        if not self.members or self.members[0] != 1:
            raise ValueError("1 is always a member of a URI-set")
        if self.members[-1] > self.n_max:
            raise ValueError("members exceed n_max")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, n) -> bool:
        i = np.searchsorted(self.members, n)
        return i < len(self.members) and self.members[i] == n

    def __iter__(self):
        return iter(self.members)

    def max_upto(self, n: int) -> int:
        """``max(E ∩ {1, ..., n})``."""
        i = int(np.searchsorted(self.members, n, side="right"))
        return self.members[i - 1]


def bernoulli_membership(n_max: int, reps: int, rng: RngStream) -> np.ndarray:
    """Boolean matrix ``(reps, n_max)``; entry ``[r, n-1]`` is ``n ∈ E`` for replica ``r``.

    Coin for ``n`` is "uniform integer in {0..n-1} equals 0", exactly ``1/n``.
    """
    if n_max < 1 or reps < 1:
        raise ParameterError("n_max and reps must be >= 1")
    out = np.zeros((reps, n_max), dtype=bool)
    out[:, 0] = True
    if n_max > 1:
        bounds = np.broadcast_to(np.arange(2, n_max + 1, dtype=np.uint64), (reps, n_max - 1))
        out[:, 1:] = rng.below_array(bounds) == 0
    return out


def bernoulli_sample(n_max: int, rng: RngStream) -> FiniteUriSet:
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    members = [1]
    for lo in range(2, n_max + 1, _CHUNK):
        hi = min(n_max, lo + _CHUNK - 1)
        ns = np.arange(lo, hi + 1, dtype=np.uint64)
        hits = np.flatnonzero(rng.below_array(ns) == 0)
        members.extend((hits + lo).tolist())
    return FiniteUriSet(n_max, tuple(members))


def next_gap(m: int, rng: RngStream, w: int = 64) -> int:
    """Next URI element after ``m``: ``ceil(m * 2**w / r)``, ``r`` uniform in ``[1, 2**w)``.

    Draws with ``r | m * 2**w`` are redrawn so atoms have exact boundaries.
    """
    if m < 1:
        raise ParameterError("next_gap needs m >= 1")
    if w == 64:
        num = m << 64
        while True:
            r = rng.next_u64()
            if r == 0:
                continue
            q, rem = divmod(num, r)
            if rem:
                return q + 1
    if w < 64 or w % 64:
        raise ParameterError("w must be a positive multiple of 64")
    num = m << w
    top = (1 << w) - 1
    while True:
        r = rng.below(top) + 1
        q, rem = divmod(num, r)
        if rem:
            return q + 1


@dataclass
class UriStream:
    """Lazy generator of ``N_1 = 1 < N_2 < ...``.

    ``max_digits`` caps the decimal length of emitted elements; exceeding it
    raises :class:`ElementSizeError`.
    """

    rng: RngStream
    max_digits: int | None = DEFAULT_MAX_DIGITS
    w: int = 64
    current: int = field(default=0, init=False)
    index: int = field(default=0, init=False)

    def __post_init__(self):
        self._cap_bits = None if self.max_digits is None else int(self.max_digits * _LOG2_10)

    def __iter__(self) -> Iterator[int]:
        return self

    def __next__(self) -> int:
        return stream_next(self)

    def _check_size(self, n: int) -> None:
        if self._cap_bits is not None and n.bit_length() > self._cap_bits:
            if n >= _power(10, self.max_digits):
                raise ElementSizeError(
                    f"element N_{self.index + 1} exceeds {self.max_digits} decimal digits"
                )

    def take(self, k: int) -> list[int]:
        return [stream_next(self) for _ in range(k)]

    def advance_to(self, k: int) -> int:
        """Advance until ``index == k`` and return ``N_k``."""
        if k < self.index:
            raise ParameterError(f"stream already at index {self.index} > {k}")
        while self.index < k:
            stream_next(self)
        return self.current


def stream_next(s: UriStream) -> int:
    if s.index == 0:
        nxt = 1
    else:
        nxt = next_gap(s.current, s.rng, s.w)
        s._check_size(nxt)
    s.current = nxt
    s.index += 1
    return nxt


def _as_stream(x, stream_id: int) -> RngStream:
    return x if isinstance(x, RngStream) else RngStream(int(x), stream_id)


def compose_order2(outer_seed, inner_seed, k: int,
                   max_index: int = DEFAULT_MAX_COMPOSED_INDEX,
                   max_digits: int | None = DEFAULT_MAX_DIGITS) -> int:
    """``N^(1)`` evaluated at index ``N^(2)_k``.

    Seeds may be ints (streams ``(outer_seed, 0)`` and ``(inner_seed, 1)``, so
    equal seeds still give independent sets) or :class:`RngStream` objects.
    Raises :class:`ElementSizeError` when the composed index exceeds ``max_index``.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    inner = UriStream(_as_stream(inner_seed, 1), max_digits=max_digits)
    big_k = inner.advance_to(k)
    if big_k > max_index:
        raise ElementSizeError(f"composed index {big_k} exceeds cap {max_index}")
    outer = UriStream(_as_stream(outer_seed, 0), max_digits=max_digits)
    return outer.advance_to(big_k)
