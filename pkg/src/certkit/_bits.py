"""Packed bit columns.

A batch of ``rows`` inputs over ``n`` coordinates is stored column-wise: the
bits of coordinate ``i`` across all rows live in a ``uint64`` array of
``ceil(rows / 64)`` words, row ``r`` at bit ``r % 64`` of word ``r // 64``.
Bits past ``rows`` in the last word are kept at zero by every producer.
"""

from __future__ import annotations

from typing import Iterator, Mapping, Sequence

import numpy as np

WORD_BITS = 64
ALL_ONES = np.uint64(0xFFFF_FFFF_FFFF_FFFF)


def n_words(rows: int) -> int:
    return (rows + WORD_BITS - 1) // WORD_BITS


def tail_mask(rows: int) -> np.ndarray:
    """Per-word mask with exactly ``rows`` low bits set overall."""
    words = np.full(n_words(rows), ALL_ONES)
    rem = rows % WORD_BITS
    if rem:
        words[-1] = np.uint64((1 << rem) - 1)
    return words


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 1-D 0/1 array into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows = bits.shape[0]
    padded = np.zeros(n_words(rows) * WORD_BITS, dtype=np.uint8)
    padded[:rows] = bits
    return np.packbits(padded, bitorder="little").view(np.uint64)


def unpack_bits(words: np.ndarray, rows: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns a uint8 array of length ``rows``."""
    raw = np.ascontiguousarray(words, dtype=np.uint64).view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:rows]


def _binary_digits(p: float) -> Iterator[int]:
    # p is a dyadic rational, so its expansion terminates
    num, den = float(p).as_integer_ratio()
    while num:
        num *= 2
        if num >= den:
            num -= den
            yield 1
        else:
            yield 0


def bernoulli_words(gen: np.random.Generator, p: float, rows: int) -> np.ndarray:
    """Draw ``rows`` independent Bernoulli(p) bits, packed.

    Each lane compares a lazily revealed uniform real against the binary
    expansion of ``p`` and stops at the first differing digit, so the result
    is exact for the float ``p`` (no quantization) and costs about two random
    bits per output bit on average.
    """
    words = n_words(rows)
    if p <= 0.0:
        return np.zeros(words, dtype=np.uint64)
    if p >= 1.0:
        return tail_mask(rows)
    out = np.zeros(words, dtype=np.uint64)
    undecided = np.full(words, ALL_ONES)
    idx = None
    raw = gen.bit_generator.random_raw
    for digit in _binary_digits(p):
        r = raw(undecided.size)
        if digit:
            hit = undecided & ~r
            if idx is None:
                out |= hit
            else:
                out[idx] |= hit
            undecided &= r
        else:
            undecided &= ~r
        live = np.count_nonzero(undecided)
        if live == 0:
            break
        if live < undecided.size // 2:
            keep = np.flatnonzero(undecided)
            idx = keep if idx is None else idx[keep]
            undecided = undecided[keep]
    return out & tail_mask(rows)


class Batch:
    """Column-access view of ``rows`` inputs in ``{0,1}^n`` (1-based coordinates)."""

    n: int
    rows: int

    def column(self, i: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def words(self) -> int:
        return n_words(self.rows)

    def ones(self) -> np.ndarray:
        return tail_mask(self.rows)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.words, dtype=np.uint64)

    def dense(self) -> np.ndarray:
        """Materialize as a ``(rows, n)`` uint8 array."""
        out = np.empty((self.rows, self.n), dtype=np.uint8)
        for i in range(1, self.n + 1):
            out[:, i - 1] = unpack_bits(self.column(i), self.rows)
        return out


class DenseBatch(Batch):
    """Batch built from explicit rows."""

    def __init__(self, rows: np.ndarray):
        arr = np.atleast_2d(np.asarray(rows, dtype=np.uint8))
        self.rows, self.n = arr.shape
        self._cols: dict[int, np.ndarray] = {}
        self._dense = arr

    def column(self, i: int) -> np.ndarray:
        col = self._cols.get(i)
        if col is None:
            if self.rows == 1:
                col = np.array([self._dense[0, i - 1]], dtype=np.uint64)
            else:
                col = pack_bits(self._dense[:, i - 1])
            self._cols[i] = col
        return col

    def dense(self) -> np.ndarray:
        return self._dense


class HypercubeBatch(Batch):
    """All ``2^n`` inputs, row ``r`` being the integer encoding with coordinate 1 as MSB."""

    def __init__(self, n: int):
        self.n = n
        self.rows = 1 << n
        self._index = np.arange(self.rows, dtype=np.int64)

    def column(self, i: int) -> np.ndarray:
        bits = ((self._index >> (self.n - i)) & 1).astype(np.uint8)
        return pack_bits(bits)


class OverrideBatch(Batch):
    """View of ``base`` with some coordinates pinned to constants."""

    def __init__(self, base: Batch, assignments: Mapping[int, int]):
        self.base = base
        self.n = base.n
        self.rows = base.rows
        self.assignments = assignments

    def column(self, i: int) -> np.ndarray:
        if i in self.assignments:
            return self.ones() if self.assignments[i] else self.zeros()
        return self.base.column(i)


def as_batch(x: Batch | Sequence | np.ndarray) -> Batch:
    if isinstance(x, Batch):
        return x
    return DenseBatch(np.asarray(x))
