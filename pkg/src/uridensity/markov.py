"""The mantissa chain ``M_{k+1} = M(M_k * U)`` and its convergence to Benford."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .mantissa import real_mantissa, real_mantissa_array
from .rng import RngStream

__all__ = [
    "ChainState",
    "chain_step",
    "sample_benford",
    "sample_benford_array",
    "EmpiricalCdf",
    "chain_distribution",
    "default_grid",
    "grid_distance",
    "kolmogorov_distance",
]


@dataclass(frozen=True)
class ChainState:
    value: float
    base: int = 10

    def __post_init__(self):
        if not 1.0 <= self.value < self.base:
            raise ValueError(f"chain state {self.value} outside [1, {self.base})")


def chain_step(a: ChainState, u: float) -> ChainState:
    if not 0.0 < u < 1.0:
        raise ParameterError(f"u must lie in (0, 1), got {u}")
    return ChainState(real_mantissa(a.value * u, a.base), a.base)


def sample_benford(rng: RngStream, base: int = 10) -> ChainState:
    """Inverse-CDF draw ``b**V``, ``V`` uniform in [0, 1)."""
    x = float(base) ** rng.random()
    return ChainState(min(x, math.nextafter(float(base), 0.0)), base)


def sample_benford_array(size: int, rng: RngStream, base: int = 10) -> np.ndarray:
    x = np.power(float(base), rng.uniforms(size))
    return np.minimum(x, np.nextafter(float(base), 0.0))


class EmpiricalCdf:
    """Right-continuous empirical CDF of a finite sample."""

    def __init__(self, sample: np.ndarray):
        self.sample = np.sort(np.asarray(sample, dtype=np.float64))

    def __len__(self) -> int:
        return self.sample.size

    def __call__(self, t):
        return np.searchsorted(self.sample, t, side="right") / self.sample.size


def chain_distribution(m0, k: int, reps: int, rng: RngStream, base: int = 10) -> EmpiricalCdf:
    """Empirical law of ``M_k`` over ``reps`` independent runs.

    ``m0`` is a start value in ``[1, base)``, an array of ``reps`` start
    values, or the string ``"benford"`` for ``M_0 ~ mu_B``.
    """
    if reps < 1 or k < 0:
        raise ParameterError("need reps >= 1 and k >= 0")
    if isinstance(m0, str):
        if m0 != "benford":
            raise ParameterError(f"unknown start {m0!r}")
        x = sample_benford_array(reps, rng, base)
    else:
        x = np.broadcast_to(np.asarray(m0, dtype=np.float64), (reps,)).copy()
        if np.any((x < 1.0) | (x >= base)):
            raise ParameterError(f"start values must lie in [1, {base})")
    for _ in range(k):
        x = real_mantissa_array(x * rng.uniforms(reps, open_interval=True), base)
    return EmpiricalCdf(x)


def default_grid(base: int = 10) -> np.ndarray:
    """``{1.0, 1.1, ..., base - 0.1}``: 90 points for base 10."""
    return np.round(np.arange(10, 10 * base) / 10.0, 10)


def grid_distance(cdf: EmpiricalCdf, base: int = 10, grid: np.ndarray | None = None) -> float:
    """``max_t |F(t) - log_b t|`` over a fixed grid."""
    g = default_grid(base) if grid is None else np.asarray(grid)
    # F(t-) is the law of [1, t); compare both one-sided limits
    left = np.searchsorted(cdf.sample, g, side="left") / len(cdf)
    right = cdf(g)
    target = np.log(g) / math.log(base)
    return float(max(np.abs(left - target).max(), np.abs(right - target).max()))


def kolmogorov_distance(cdf: EmpiricalCdf, base: int = 10) -> float:
    """Exact sup-distance between the empirical CDF and ``log_b t``."""
    x = cdf.sample
    n = x.size
    target = np.log(x) / math.log(base)
    i = np.arange(1, n + 1)
    return float(max((i / n - target).max(), (target - (i - 1) / n).max()))
