"""Deterministic, splittable random number generation.

The generator is Philox4x32-10, a counter-based block cipher keyed by a
64-bit seed. A 64-bit stream id occupies the upper counter words, so
distinct streams of one seed are disjoint by construction and any block is
addressable without sequential state. Each 128-bit output block is mapped
to two 53-bit uniforms, and uniforms are turned into standard normals with
the polar (Marsaglia) form of the Box-Muller transform, one candidate pair
per block. Identical (seed, stream) always reproduces the identical
sequence; nothing in here depends on global numpy RNG state.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = 0xFFFFFFFFFFFFFFFF

# one polar candidate pair lands inside the unit disk with prob pi/4
_ACCEPT_RATE = 0.78


def _philox_words(seed: int, stream: int, start: int, count: int):
    """Output words (w0, w1, w2, w3) of Philox4x32-10 blocks [start, start+count)."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    c0 = idx & _MASK32
    c1 = idx >> np.uint64(32)
    c2 = np.full(count, stream & 0xFFFFFFFF, dtype=np.uint64)
    c3 = np.full(count, (stream >> 32) & 0xFFFFFFFF, dtype=np.uint64)
    k0 = np.uint64(seed & 0xFFFFFFFF)
    k1 = np.uint64((seed >> 32) & 0xFFFFFFFF)
    for _ in range(10):
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ k1,
            p0 & _MASK32,
        )
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _to_uniform(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """Map two 32-bit words to one double in [0, 1) with 53 random bits."""
    bits = (hi << np.uint64(32)) | lo
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


class NormalStream:
    """Sequential view of one (seed, stream) normal sequence.

    ``normals(k)`` returns the next k values of the sequence; splitting one
    request into several smaller ones yields the same numbers.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._block = 0
        self._pending = np.empty(0, dtype=np.float64)

    def uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` raw uniforms in [0, 1) (two per Philox block).

        Note: this advances the block cursor, interleaving with the normal
        sequence; use separate streams for separate purposes.
        """
        blocks = (count + 1) // 2
        w0, w1, w2, w3 = _philox_words(self.seed, self.stream, self._block, blocks)
        self._block += blocks
        u = np.empty(2 * blocks, dtype=np.float64)
        u[0::2] = _to_uniform(w0, w1)
        u[1::2] = _to_uniform(w2, w3)
        return u[:count]

    def normals(self, count: int) -> np.ndarray:
        """Next ``count`` standard normal deviates."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        out = np.empty(count, dtype=np.float64)
        have = min(count, self._pending.size)
        out[:have] = self._pending[:have]
        self._pending = self._pending[have:]
        while have < count:
            need = count - have
            blocks = int(need / (2.0 * _ACCEPT_RATE)) + 64
            w0, w1, w2, w3 = _philox_words(self.seed, self.stream, self._block, blocks)
            self._block += blocks
            v1 = 2.0 * _to_uniform(w0, w1) - 1.0
            v2 = 2.0 * _to_uniform(w2, w3) - 1.0
            s = v1 * v1 + v2 * v2
            keep = (s < 1.0) & (s > 0.0)
            v1, v2, s = v1[keep], v2[keep], s[keep]
            f = np.sqrt(-2.0 * np.log(s) / s)
            batch = np.empty(2 * s.size, dtype=np.float64)
            batch[0::2] = v1 * f
            batch[1::2] = v2 * f
            take = min(need, batch.size)
            out[have : have + take] = batch[:take]
            self._pending = batch[take:]
            have += take
        return out

    def standard_normal(self, shape) -> np.ndarray:
        """Next normals reshaped row-major into ``shape``."""
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        n = int(np.prod(shape)) if shape else 1
        return self.normals(n).reshape(shape)


def normal_stream(seed: int, stream: int = 0) -> NormalStream:
    """Open the deterministic standard-normal sequence for (seed, stream)."""
    return NormalStream(seed, stream)
