"""Exact base-b mantissae of big integers, the Benford measure, and float mantissae.

All threshold tests on integers go through :func:`mantissa_below`, which
compares ``n * q < p * b**e`` for ``t = p/q``; no floating point is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

__all__ = [
    "ExactMantissa",
    "exact_mantissa",
    "exponent_of",
    "mantissa_below",
    "as_rational",
    "benford_cdf",
    "benford_digit_probability",
    "real_mantissa",
    "real_mantissa_array",
]


def _check_base(b: int) -> int:
    if isinstance(b, bool) or not isinstance(b, (int, np.integer)) or b < 2:
        raise ValueError(f"base must be an integer >= 2, got {b!r}")
    return int(b)


@lru_cache(maxsize=16384)
def _power(b: int, e: int) -> int:
    return b ** e


@lru_cache(maxsize=None)
def _log2_over_logb(b: int) -> float:
    return math.log(2) / math.log(b)


def exponent_of(n: int, b: int) -> int:
    """``floor(log_b n)`` for an integer ``n >= 1``, computed exactly."""
    bl = n.bit_length()
    if b & (b - 1) == 0:
        return (bl - 1) // (b.bit_length() - 1)
    # 2**(bl-1) <= n < 2**bl pins floor(log_b n) to one of two neighbours
    e = int((bl - 1) * _log2_over_logb(b))
    while e > 0 and _power(b, e) > n:
        e -= 1
    while _power(b, e + 1) <= n:
        e += 1
    return e


@dataclass(frozen=True)
class ExactMantissa:
    """``value_n = M_b(n) * base_b ** exponent_e`` with ``M_b(n)`` in ``[1, b)``."""

    value_n: int
    base_b: int
    exponent_e: int

    @property
    def scale(self) -> int:
        """``base_b ** exponent_e``."""
        return _power(self.base_b, self.exponent_e)

    @property
    def mantissa(self) -> Fraction:
        return Fraction(self.value_n, self.scale)

    def __float__(self) -> float:
        return float(self.mantissa)

    def leading_digit(self) -> int:
        return self.value_n // self.scale

    def shifted(self, k: int = 1) -> "ExactMantissa":
        """Mantissa of ``n * b**k``: same mantissa, exponent moved by ``k``."""
        return ExactMantissa(self.value_n * _power(self.base_b, k), self.base_b, self.exponent_e + k)


def exact_mantissa(n: int, b: int = 10) -> ExactMantissa:
    b = _check_base(b)
    n = int(n)
    if n < 1:
        raise ValueError(f"mantissa needs a positive integer, got {n}")
    return ExactMantissa(n, b, exponent_of(n, b))


def as_rational(t) -> Fraction:
    """Coerce a threshold to an exact rational.

    Floats are read through their shortest decimal repr, so ``1.85`` means
    ``37/20`` and not the nearest binary double.
    """
    if isinstance(t, Fraction):
        return t
    if isinstance(t, (int, np.integer, Rational)):
        return Fraction(t)
    if isinstance(t, (float, np.floating)):
        if not math.isfinite(t):
            raise ValueError(f"threshold must be finite, got {t}")
        return Fraction(repr(float(t)))
    return Fraction(str(t))


def mantissa_below(m: ExactMantissa, t, strict: bool = True) -> bool:
    """Exact truth of ``M_b(n) < t`` (or ``<=`` when ``strict=False``), ``1 <= t <= b``."""
    t = as_rational(t)
    if not 1 <= t <= m.base_b:
        raise ValueError(f"threshold {t} outside [1, {m.base_b}]")
    lhs = m.value_n * t.denominator
    rhs = t.numerator * m.scale
    return lhs < rhs if strict else lhs <= rhs


def benford_cdf(t, b: int = 10) -> float:
    """``mu_b([1, t]) = log_b t`` for ``1 <= t <= b``."""
    b = _check_base(b)
    if not 1 <= t <= b:
        raise ValueError(f"Benford CDF defined on [1, {b}], got {t}")
    if t == b:
        return 1.0
    return math.log(t) / math.log(b)


def benford_digit_probability(d: int, b: int = 10) -> float:
    """Benford probability ``log_b(1 + 1/d)`` of leading digit ``d``."""
    if not 1 <= d < b:
        raise ValueError(f"digit {d} invalid for base {b}")
    return math.log1p(1.0 / d) / math.log(b)


def real_mantissa(x: float, b: int = 10) -> float:
    """Float mantissa of ``x > 0`` in ``[1, b)``."""
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"mantissa needs a positive finite real, got {x}")
    e = math.floor(math.log(x) / math.log(b))
    if e < -300:
        x *= float(b) ** 300
        e += 300
    m = x / float(b) ** e
    if m >= b:
        m /= b
    elif m < 1.0:
        m *= b
    return m


def real_mantissa_array(x: np.ndarray, b: int = 10) -> np.ndarray:
    """Vectorised :func:`real_mantissa` for arrays of positive floats."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all((x > 0) & np.isfinite(x)):
        raise ValueError("mantissa needs positive finite reals")
    lb = math.log(b)
    e = np.floor(np.log(x) / lb)
    half = np.trunc(-e / 2)
    m = (x * np.power(float(b), half)) * np.power(float(b), -e - half)
    m = np.where(m >= b, m / b, m)
    m = np.where(m < 1.0, m * b, m)
    return m
