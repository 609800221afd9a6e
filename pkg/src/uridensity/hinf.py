"""Backward uniform chain and the stochastic reading of Flehinger's averages.

``Ỹ_1`` is uniform on ``{1..n}`` and ``Ỹ_{i+1}`` uniform on ``{1..Ỹ_i}``;
then ``P(Ỹ_k in A)`` equals the iterated Cesàro average ``P_n^k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import DensityEstimate, DensityKind
from .errors import ParameterError
from .predicates import SetPredicate
from .rng import RngStream

__all__ = [
    "BackwardChain",
    "backward_sample",
    "backward_paths",
    "hinf_mc",
    "strict_decrease_prob",
]


@dataclass(frozen=True)
class BackwardChain:
    n: int
    path: tuple[int, ...]

    def __post_init__(self):
        prev = self.n
        for y in self.path:
            if not 1 <= y <= prev:
                raise ValueError(f"path {self.path} is not a backward chain from {self.n}")
            prev = y

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.path, self.path[1:]))


def _check(n: int, k: int, reps: int = 1) -> None:
    if n < 1 or k < 1 or reps < 1:
        raise ParameterError("need n, k, reps >= 1")


def backward_sample(n: int, k: int, rng: RngStream) -> BackwardChain:
    _check(n, k)
    path = []
    y = n
    for _ in range(k):
        y = 1 + rng.below(y)
        path.append(y)
    return BackwardChain(n, tuple(path))


def backward_paths(n: int, k: int, reps: int, rng: RngStream) -> np.ndarray:
    """``reps`` independent chains as an int64 array of shape ``(reps, k)``."""
    _check(n, k, reps)
    out = np.empty((reps, k), dtype=np.int64)
    y = np.full(reps, n, dtype=np.int64)
    for i in range(k):
        y = 1 + rng.below_array(y)
        out[:, i] = y
    return out


def hinf_mc(A: SetPredicate, n: int, k: int, reps: int, rng: RngStream) -> DensityEstimate:
    """Monte Carlo ``P(Ỹ_k^(n) in A)`` with its standard error."""
    _check(n, k, reps)
    last = backward_paths(n, k, reps, rng)[:, -1]
    lo, hi = int(last.min()), int(last.max())
    hit = A.indicator(lo, hi)[last - lo]
    p = float(hit.mean())
    se = float(hit.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return DensityEstimate(DensityKind.HINF, p, reps, se, A.id)


def strict_decrease_prob(n: int, k: int, reps: int, rng: RngStream) -> float:
    """Monte Carlo ``P(Ỹ_1 > ... > Ỹ_k)``."""
    _check(n, k, reps)
    if k == 1:
        return 1.0
    paths = backward_paths(n, k, reps, rng)
    return float(np.all(paths[:, 1:] < paths[:, :-1], axis=1).mean())
