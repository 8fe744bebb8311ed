"""15-bit logical timestamps packed four to a 64-bit word.

Row layout (``ceil(capacity / 4)`` words)::

    word 0: [count:4][ts3:15][ts2:15][ts1:15][ts0:15]
    word k: [unused:4][ts(4k+3)] ... [ts(4k)]

so a row can hold at most 15 timestamps.
"""
from __future__ import annotations

from typing import Iterable, Sequence

TS_BITS = 15
TS_MOD = 1 << TS_BITS
TS_MASK = TS_MOD - 1
TS_HALF = TS_MOD >> 1
PER_WORD = 4
COUNT_SHIFT = 60
COUNT_MAX = 15
WORD_BYTES = 8


def compress_ts(ts: int) -> int:
    return ts & TS_MASK


def ts_diff(a: int, b: int) -> int:
    """Signed distance a - b on the 15-bit ring, in [-16384, 16383]."""
    return ((a - b + TS_HALF) & TS_MASK) - TS_HALF


def words_per_row(capacity: int) -> int:
    return -(-capacity // PER_WORD)


def row_count(words: list[int], base: int) -> int:
    return words[base] >> COUNT_SHIFT


def row_get(words: list[int], base: int, k: int) -> int:
    return (words[base + k // PER_WORD] >> (TS_BITS * (k % PER_WORD))) & TS_MASK


def row_append(words: list[int], base: int, ts: int) -> int:
    """Append ``ts`` (compressed here) to the row at ``base``; return the new count.

    The caller guarantees the row has room.
    """
    k = words[base] >> COUNT_SHIFT
    w = base + k // PER_WORD
    words[w] |= (ts & TS_MASK) << (TS_BITS * (k % PER_WORD))
    words[base] += 1 << COUNT_SHIFT
    return k + 1


def row_values(words: list[int], base: int) -> list[int]:
    return [row_get(words, base, k) for k in range(words[base] >> COUNT_SHIFT)]


def row_clear(words: list[int], base: int, n_words: int) -> None:
    for w in range(base, base + n_words):
        words[w] = 0


class TimestampRow(Sequence[int]):
    """A standalone packed row, mostly for inspection and tests.

    The tables keep their rows in flat word lists; this class wraps the
    same encoding for a single block.
    """

    def __init__(self, addr: int, capacity: int, timestamps: Iterable[int] = ()):
        if not 1 <= capacity <= COUNT_MAX:
            raise ValueError(f"row capacity must be in 1..{COUNT_MAX}")
        self.addr = addr
        self.capacity = capacity
        self.words = [0] * words_per_row(capacity)
        for ts in timestamps:
            self.append(ts)

    def append(self, ts: int) -> None:
        if len(self) >= self.capacity:
            raise OverflowError(f"row for block {self.addr} already holds {self.capacity} timestamps")
        row_append(self.words, 0, ts)

    def __len__(self) -> int:
        return row_count(self.words, 0)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        n = len(self)
        if k < 0:
            k += n
        if not 0 <= k < n:
            raise IndexError(k)
        return row_get(self.words, 0, k)

    def __repr__(self) -> str:
        return f"TimestampRow({self.addr}, {list(self)})"
