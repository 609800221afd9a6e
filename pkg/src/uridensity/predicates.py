"""Membership oracles for subsets ``A`` of the positive integers.

A :class:`SetPredicate` is a pure function on Python ints (any size).  Built-ins
also carry a vectorised ``mask`` for contiguous int64 ranges, used by the
exact table computations; it must agree with ``member`` everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .mantissa import _check_base, _power, as_rational, exponent_of

__all__ = [
    "SetPredicate",
    "all_integers",
    "empty_set",
    "leading_digit",
    "mantissa_below_t",
    "mantissa_in",
    "residue_class",
    "multiples_of",
    "finite_set",
    "parse_predicate",
]

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class SetPredicate:
    id: str
    member: Callable[[int], bool] = field(compare=False)
    mask: Callable[[int, int], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __call__(self, n: int) -> bool:
        return self.member(n)

    def indicator(self, lo: int, hi: int) -> np.ndarray:
        """Boolean array of ``1_A(n)`` for ``n = lo, ..., hi`` (inclusive)."""
        if lo < 1 or hi < lo - 1:
            raise ValueError(f"bad range [{lo}, {hi}]")
        if self.mask is not None and hi < _INT64_SAFE:
            return np.asarray(self.mask(lo, hi), dtype=bool)
        return np.fromiter((self.member(n) for n in range(lo, hi + 1)), dtype=bool, count=hi - lo + 1)


def all_integers() -> SetPredicate:
    return SetPredicate("all", lambda n: True, lambda lo, hi: np.ones(hi - lo + 1, dtype=bool))


def empty_set() -> SetPredicate:
    return SetPredicate("empty", lambda n: False, lambda lo, hi: np.zeros(hi - lo + 1, dtype=bool))


def _powers_upto(b: int, hi: int) -> np.ndarray:
    pw = [1]
    while pw[-1] <= hi // b:
        pw.append(pw[-1] * b)
    return np.array(pw, dtype=np.int64)


def _scales(ns: np.ndarray, b: int, hi: int) -> np.ndarray:
    """``b ** floor(log_b n)`` for each entry of an int64 array."""
    pw = _powers_upto(b, hi)
    return pw[np.searchsorted(pw, ns, side="right") - 1]


def mantissa_in(lo_t, hi_t, b: int = 10, pid: str | None = None) -> SetPredicate:
    """``{n : lo_t <= M_b(n) < hi_t}`` for rationals ``1 <= lo_t < hi_t <= b``."""
    b = _check_base(b)
    lo_t, hi_t = as_rational(lo_t), as_rational(hi_t)
    if not 1 <= lo_t < hi_t <= b:
        raise ValueError(f"need 1 <= lo < hi <= {b}, got [{lo_t}, {hi_t})")
    lp, lq = lo_t.numerator, lo_t.denominator
    hp, hq = hi_t.numerator, hi_t.denominator

    def member(n: int) -> bool:
        s = _power(b, exponent_of(n, b))
        return lp * s <= n * lq and n * hq < hp * s

    def mask(lo: int, hi: int) -> np.ndarray:
        if max(lq, hq) * hi >= _INT64_SAFE or max(lp, hp) * hi >= _INT64_SAFE:
            return np.fromiter((member(n) for n in range(lo, hi + 1)), dtype=bool)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        s = _scales(ns, b, hi)
        return (lp * s <= ns * lq) & (ns * hq < hp * s)

    return SetPredicate(pid or f"mantissa_in[{lo_t},{hi_t})_b{b}", member, mask)


def leading_digit(d: int, b: int = 10) -> SetPredicate:
    """Integers whose first base-``b`` digit is ``d``."""
    b = _check_base(b)
    if not 1 <= d < b:
        raise ValueError(f"digit {d} invalid in base {b}")
    return mantissa_in(d, d + 1, b, pid=f"leading_digit_{d}_b{b}")


def mantissa_below_t(t, b: int = 10) -> SetPredicate:
    """``{n : M_b(n) < t}`` with ``t`` an exact rational in ``(1, b]``."""
    t = as_rational(t)
    return mantissa_in(1, t, b, pid=f"mantissa_below_{t}_b{b}")


def residue_class(modulus: int, r: int) -> SetPredicate:
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    r %= modulus
    return SetPredicate(
        f"residue_{r}_mod_{modulus}",
        lambda n: n % modulus == r,
        lambda lo, hi: np.arange(lo, hi + 1, dtype=np.int64) % modulus == r,
    )


def multiples_of(m: int) -> SetPredicate:
    p = residue_class(m, 0)
    return SetPredicate(f"multiples_of_{m}", p.member, p.mask)


def finite_set(values: Iterable[int], pid: str | None = None) -> SetPredicate:
    s = frozenset(int(v) for v in values)
    arr = np.array(sorted(s), dtype=object if s and max(s) >= _INT64_SAFE else np.int64)

    def mask(lo: int, hi: int) -> np.ndarray:
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        return np.isin(ns, arr)

    name = pid or "finite_" + "_".join(str(v) for v in sorted(s)[:8]) + ("_etc" if len(s) > 8 else "")
    return SetPredicate(name, s.__contains__, mask)


def parse_predicate(spec: str, b: int = 10) -> SetPredicate:
    """Build a predicate from a short text form.

    ``all``, ``empty``, ``digit:D``, ``mantissa-below:T``, ``mantissa-in:LO:HI``,
    ``mult:M``, ``residue:M:R``, ``set:V1,V2,...``.  Mantissa forms use base ``b``.
    """
    head, _, rest = spec.strip().partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "all" and not args:
            return all_integers()
        if head == "empty" and not args:
            return empty_set()
        if head == "digit" and len(args) == 1:
            return leading_digit(int(args[0]), b)
        if head == "mantissa-below" and len(args) == 1:
            return mantissa_below_t(args[0], b)
        if head == "mantissa-in" and len(args) == 2:
            return mantissa_in(args[0], args[1], b)
        if head == "mult" and len(args) == 1:
            return multiples_of(int(args[0]))
        if head == "residue" and len(args) == 2:
            return residue_class(int(args[0]), int(args[1]))
        if head == "set" and len(args) == 1:
            return finite_set(int(v) for v in args[0].split(",") if v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad predicate {spec!r}: {exc}") from None
    raise ValueError(f"unknown predicate {spec!r}")
