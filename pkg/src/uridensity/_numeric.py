"""Compensated prefix sums and sums for long float arrays."""

from __future__ import annotations

import math

import numpy as np

BLOCK = 1024


def compensated_cumsum(x: np.ndarray, out: np.ndarray | None = None, block: int = BLOCK) -> np.ndarray:
    """Prefix sums of ``x`` with error ``<= (block + 2) * eps * max partial sum``.

    Sums within each block naively, then carries block totals with Neumaier
    compensation.  ``out`` may alias ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if out is None:
        out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    nfull = n // block
    head = nfull * block
    if nfull:
        view = out[:head].reshape(nfull, block)
        np.cumsum(x[:head].reshape(nfull, block), axis=1, out=view)
        totals = view[:, -1].tolist()
    else:
        totals = []
    if head < n:
        np.cumsum(x[head:], out=out[head:])
        totals.append(float(out[-1]))
    carries = np.empty(len(totals), dtype=np.float64)
    s = 0.0
    c = 0.0
    for i, t in enumerate(totals):
        carries[i] = s + c
        y = s + t
        if abs(s) >= abs(t):
            c += (s - y) + t
        else:
            c += (t - y) + s
        s = y
    if nfull:
        view += carries[:nfull, None]
    if head < n:
        out[head:] += carries[-1]
    return out


def accurate_sum(x: np.ndarray, block: int = 1 << 16) -> float:
    """Correctly rounded sum of the block sums of ``x`` (pairwise inside blocks)."""
    x = np.asarray(x, dtype=np.float64)
    return math.fsum(float(x[i:i + block].sum()) for i in range(0, x.size, block))
