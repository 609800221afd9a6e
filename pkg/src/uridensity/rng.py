"""Seeded, splittable random streams.

Every stream is a Philox4x64-10 counter-based generator whose 128-bit key is
derived from ``(seed, stream_id)``::

    key = SeedSequence(entropy=seed, spawn_key=(stream_id,)).generate_state(2, uint64)

Only the raw 64-bit output of the bit generator is used; all conversions
(uniform doubles, bounded integers) are done here in exact integer
arithmetic, so the produced values depend only on the Philox stream and not
on NumPy's distribution code.

Conversions
-----------
* ``random()``      -> ``(x >> 11) * 2**-53`` in [0, 1)
* ``random_open()`` -> ``((x >> 12) + 0.5) * 2**-52`` in (0, 1); 52 bits so
  the top value ``1 - 2**-53`` is representable
* ``below(n)``      -> threshold rejection: draw ``x`` in [0, 2**64), reject
  when ``x >= 2**64 - (2**64 mod n)``, return ``x mod n``.  Exactly uniform.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
_BUFFER = 4096
_INV53 = 2.0 ** -53
_INV52 = 2.0 ** -52


class RngStream:
    """One reproducible stream of 64-bit words.

    The stream is a plain value: do not advance the same instance from two
    threads.  Use distinct ``stream_id`` values for independent replicas.
    """

    __slots__ = ("seed", "stream_id", "_bitgen", "_buf", "_pos", "consumed")

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        if not 0 <= stream_id <= MASK64:
            raise ValueError(f"stream_id must fit in 64 unsigned bits, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        key = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,)).generate_state(
            2, np.uint64
        )
        self._bitgen = np.random.Philox(key=key)
        self._buf: list[int] = []
        self._pos = 0
        self.consumed = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, consumed={self.consumed})"

    def spawn(self, stream_id: int) -> "RngStream":
        """Fresh stream with the same seed and another id."""
        return RngStream(self.seed, stream_id)

    # -- raw words -----------------------------------------------------------

    def next_u64(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(_BUFFER).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        self.consumed += 1
        return x

    def u64_array(self, size: int) -> np.ndarray:
        """``size`` consecutive words of the stream as a uint64 array."""
        size = int(size)
        self.consumed += size
        rem = len(self._buf) - self._pos
        if rem <= 0:
            return self._bitgen.random_raw(size)
        take = min(rem, size)
        head = np.array(self._buf[self._pos:self._pos + take], dtype=np.uint64)
        self._pos += take
        if take == size:
            return head
        return np.concatenate([head, self._bitgen.random_raw(size - take)])

    # -- uniforms ------------------------------------------------------------

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def random_open(self) -> float:
        return ((self.next_u64() >> 12) + 0.5) * _INV52

    def uniforms(self, size: int, open_interval: bool = False) -> np.ndarray:
        if open_interval:
            x = (self.u64_array(size) >> np.uint64(12)).astype(np.float64)
            return (x + 0.5) * _INV52
        x = (self.u64_array(size) >> np.uint64(11)).astype(np.float64)
        return x * _INV53

    def exponential(self) -> float:
        return -math.log(self.random_open())

    def exponentials(self, size: int) -> np.ndarray:
        return -np.log(self.uniforms(size, open_interval=True))

    # -- bounded integers ----------------------------------------------------

    def below(self, n: int) -> int:
        """Uniform integer in ``{0, ..., n-1}``; ``n`` may be arbitrarily large."""
        n = int(n)
        if n < 1:
            raise ValueError("below() needs n >= 1")
        words = max(1, -(-n.bit_length() // 64))
        span = 1 << (64 * words)
        limit = span - span % n
        while True:
            x = 0
            for _ in range(words):
                x = (x << 64) | self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``{lo, ..., hi}`` (inclusive)."""
        return lo + self.below(hi - lo + 1)

    def below_array(self, n) -> np.ndarray:
        """Vectorised ``below``: one exact uniform draw in ``[0, n_i)`` per entry.

        Entries of ``n`` must lie in ``[1, 2**63)``.  Returns int64.
        """
        n = np.asarray(n, dtype=np.uint64)
        if n.size and int(n.min()) < 1:
            raise ValueError("below_array() needs all n >= 1")
        flat = n.reshape(-1)
        r = (np.uint64(0) - flat) % flat  # 2**64 mod n
        limit = np.uint64(0) - r          # 0 encodes 2**64 (accept all)
        x = self.u64_array(flat.size)
        bad = (r != 0) & (x >= limit)
        while bad.any():
            idx = np.flatnonzero(bad)
            x[idx] = self.u64_array(idx.size)
            bad[idx] = x[idx] >= limit[idx]
        return (x % flat).astype(np.int64).reshape(n.shape)
