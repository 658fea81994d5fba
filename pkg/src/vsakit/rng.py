"""Counter-based, splittable randomness for reproducible codebooks and trials.

Every random value in the library is a pure function of a 64-bit master seed
plus a tuple of stream tags (strings and integers). Streams are backed by
numpy's Philox4x64 counter-based bit generator, whose raw 64-bit output is
stable across platforms and numpy versions. All derived quantities (signs,
bits, bounded integers, distinct index sets) are computed from raw words by
the documented arithmetic below, never through ``numpy.random.Generator``
distribution methods, so results cannot drift with numpy releases.

Layout: a stream is addressed in *blocks* of 4 consecutive 64-bit words
(Philox's native counter step). ``words(block, n)`` returns words
``[4*block, 4*block + n)`` of the stream, so any window can be regenerated
in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np

RNG_VERSION = "philox4x64-block-v1"

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer; bijective on 64-bit ints."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _tag_word(tag) -> int:
    if isinstance(tag, str):
        return int.from_bytes(
            hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "little"
        )
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    raise TypeError(f"stream tag must be str or int, got {type(tag).__name__}")


def stream_id(*tags) -> int:
    """Fold tags into a 64-bit stream identifier (order-sensitive)."""
    h = 0x243F6A8885A308D3  # pi fractional bits; any fixed odd constant works
    for tag in tags:
        h = mix64(h ^ _tag_word(tag))
    return h


class Stream:
    """Read-only window access into one keyed Philox raw-word stream."""

    def __init__(self, seed: int, *tags):
        self.seed = int(seed) & _MASK64
        self.sid = stream_id(*tags)
        self._key = np.array([self.seed, self.sid], dtype=np.uint64)

    def words(self, block: int, nwords: int) -> np.ndarray:
        """Words ``[4*block, 4*block + nwords)`` as uint64."""
        bg = np.random.Philox(key=self._key)
        if block:
            bg.advance(block)
        return bg.random_raw(nwords)


def signs_from_words(words: np.ndarray, rows: int, ncols: int = 1) -> np.ndarray:
    """Unpack little-endian bits of per-column word windows into +-1 int8.

    ``words`` holds ``ncols`` consecutive equal-size windows; bit ``i`` of a
    window (word ``i // 64``, bit ``i % 64`` little-endian) becomes entry
    ``i`` of that column. Returns shape (rows, ncols).
    """
    per = len(words) // ncols
    bits = np.unpackbits(
        words.astype("<u8").reshape(ncols, per).view(np.uint8),
        axis=1,
        bitorder="little",
    )[:, :rows]
    return ((bits.astype(np.int8) << 1) - 1).T


def bits_from_words(words: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` little-endian bits of ``words`` as a 0/1 uint8 array."""
    return np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")[:n]


def bounded_from_words(words: np.ndarray, bound: int) -> np.ndarray:
    """Map words to integers in [0, bound) via modulo.

    Bias is < bound / 2**64, negligible for every bound used here.
    """
    return (words % np.uint64(bound)).astype(np.int64)


def choose_distinct(words: np.ndarray, m: int, k: int) -> np.ndarray:
    """k distinct uniform indices in [0, m) from exactly k raw words.

    Partial Fisher-Yates over a virtual identity array; uniform over ordered
    k-tuples of distinct elements, hence over k-subsets.
    """
    if k > m:
        raise ValueError(f"cannot choose {k} distinct indices from range {m}")
    swap: dict[int, int] = {}
    out = np.empty(k, dtype=np.int64)
    for t in range(k):
        r = t + int(words[t] % np.uint64(m - t))
        vt = swap.get(t, t)
        out[t] = swap.get(r, r)
        swap[r] = vt
    return out
