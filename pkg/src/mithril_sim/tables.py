"""Fixed-size metadata tables: recording, mining and prefetching.

Byte accounting follows a flat model: timestamp words are 8 bytes each,
prefetch-table cells are 8 bytes each, and every address index entry costs
12 bytes (8-byte block address plus a 4-byte slot index). Index entries
are counted at table capacity because the tables are preallocated.
"""
from __future__ import annotations

from typing import Iterator, Optional

from .timestamps import (
    TS_MASK,
    WORD_BYTES,
    row_append,
    row_clear,
    row_count,
    row_values,
    words_per_row,
)

INDEX_ENTRY_BYTES = 12
SHARD_ROWS = 2000
CELL_BYTES = 8


class RecordingTable:
    """Circular table of rows holding fewer than ``row_capacity`` timestamps.

    New blocks go into the slot under the write cursor; if that slot is
    occupied its block is forgotten (the oldest row, FIFO). When a row is
    migrated out, the most recently written row is moved into the hole and
    the cursor steps back, keeping occupied slots compact.
    """

    def __init__(self, rows: int, row_capacity: int):
        self.rows = rows
        self.row_capacity = row_capacity
        self.wpr = words_per_row(row_capacity)
        self._words = [0] * (rows * self.wpr)
        self._addr: list[Optional[int]] = [None] * rows
        self.index: dict[int, int] = {}
        self._cursor = 0
        self.overwrites = 0

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, addr: int) -> bool:
        return addr in self.index

    def nbytes(self) -> int:
        return self.rows * self.wpr * WORD_BYTES + self.rows * INDEX_ENTRY_BYTES

    def append(self, addr: int, ts: int) -> Optional[list[int]]:
        """Record ``ts`` for ``addr``.

        Returns the row's timestamps once it reaches ``row_capacity``; the row
        has then already been removed from this table. Otherwise None.
        """
        if self.rows == 0:
            return None
        slot = self.index.get(addr)
        if slot is None:
            slot = self._cursor
            old = self._addr[slot]
            if old is not None:
                del self.index[old]
                self.overwrites += 1
            row_clear(self._words, slot * self.wpr, self.wpr)
            self._addr[slot] = addr
            self.index[addr] = slot
            self._cursor = (slot + 1) % self.rows
        base = slot * self.wpr
        if row_append(self._words, base, ts) < self.row_capacity:
            return None
        values = row_values(self._words, base)
        self._remove(slot)
        return values

    def _remove(self, slot: int) -> None:
        wpr = self.wpr
        del self.index[self._addr[slot]]
        last = (self._cursor - 1) % self.rows
        if last != slot and self._addr[last] is not None:
            moved = self._addr[last]
            self._words[slot * wpr:(slot + 1) * wpr] = self._words[last * wpr:(last + 1) * wpr]
            self._addr[slot] = moved
            self.index[moved] = slot
            slot = last
        row_clear(self._words, slot * wpr, wpr)
        self._addr[slot] = None
        self._cursor = last

    def timestamps(self, addr: int) -> list[int]:
        slot = self.index[addr]
        return row_values(self._words, slot * self.wpr)

    def check_index(self) -> bool:
        """Every indexed block resolves to a slot that holds it."""
        occupied = sum(a is not None for a in self._addr)
        return occupied == len(self.index) and all(
            self._addr[slot] == addr and 0 < row_count(self._words, slot * self.wpr) < self.row_capacity
            for addr, slot in self.index.items()
        )


class MiningTable:
    """Array of rows that have reached minimum support.

    Rows take further timestamps up to ``row_capacity``; later events for a
    full row are dropped. ``anchor`` is the compressed timestamp following
    the newest one appended, i.e. the oldest value still distinguishable on
    the 15-bit ring; mining sorts rows by age relative to it.
    """

    def __init__(self, rows: int, row_capacity: int):
        self.rows = rows
        self.row_capacity = row_capacity
        self.wpr = words_per_row(row_capacity)
        self._words = [0] * (rows * self.wpr)
        self._addr: list[int] = []
        self.index: dict[int, int] = {}
        self.anchor = 0
        self.dropped = 0

    def __len__(self) -> int:
        return len(self._addr)

    def __contains__(self, addr: int) -> bool:
        return addr in self.index

    @property
    def full(self) -> bool:
        return len(self._addr) >= self.rows

    def nbytes(self) -> int:
        return self.rows * self.wpr * WORD_BYTES + self.rows * INDEX_ENTRY_BYTES

    def add_row(self, addr: int, timestamps: list[int]) -> None:
        slot = len(self._addr)
        base = slot * self.wpr
        for ts in timestamps:
            row_append(self._words, base, ts)
        self._addr.append(addr)
        self.index[addr] = slot
        if timestamps:
            self.anchor = (timestamps[-1] + 1) & TS_MASK

    def append(self, addr: int, ts: int) -> bool:
        """Append to an existing row; False if the row is full (event dropped)."""
        base = self.index[addr] * self.wpr
        if row_count(self._words, base) >= self.row_capacity:
            self.dropped += 1
            return False
        row_append(self._words, base, ts)
        self.anchor = (ts + 1) & TS_MASK
        return True

    def rows_view(self) -> list[tuple[int, list[int]]]:
        """(addr, timestamps) for every row, in insertion order."""
        return [(addr, row_values(self._words, i * self.wpr)) for i, addr in enumerate(self._addr)]

    def clear(self) -> None:
        for i in range(len(self._addr) * self.wpr):
            self._words[i] = 0
        self._addr.clear()
        self.index.clear()


class PrefetchTable:
    """Sharded map from a block to at most ``list_size`` associated blocks.

    Shards of 2000 rows are allocated on demand up to ``max_shards``
    (None means unbounded). Once every allowed row is in use, new sources
    recycle rows oldest-first. Associations in a row are kept oldest to
    newest and the oldest is dropped when a row overflows.
    """

    def __init__(self, list_size: int, max_shards: Optional[int] = None):
        self.list_size = list_size
        self.width = 1 + list_size
        self.max_shards = max_shards
        self.shards: list[list[Optional[int]]] = []
        self.index: dict[int, int] = {}
        self._next_row = 0
        self.recycled = 0

    @classmethod
    def shard_bytes(cls, list_size: int) -> int:
        return SHARD_ROWS * (1 + list_size) * CELL_BYTES + SHARD_ROWS * INDEX_ENTRY_BYTES

    def nbytes(self) -> int:
        return len(self.shards) * self.shard_bytes(self.list_size)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, addr: int) -> bool:
        return addr in self.index

    def _cells(self, row: int) -> tuple[list[Optional[int]], int]:
        shard, r = divmod(row, SHARD_ROWS)
        return self.shards[shard], r * self.width

    def _allocate(self, src: int) -> Optional[int]:
        # _next_row counts allocations; past the last shard it wraps to the oldest row
        n = self._next_row
        capacity = len(self.shards) * SHARD_ROWS
        if n >= capacity and (self.max_shards is None or len(self.shards) < self.max_shards):
            self.shards.append([None] * (SHARD_ROWS * self.width))
            capacity += SHARD_ROWS
        if capacity == 0:
            return None
        row = n % capacity
        cells, base = self._cells(row)
        old = cells[base]
        if old is not None:
            del self.index[old]
            self.recycled += 1
        cells[base] = src
        for c in range(base + 1, base + self.width):
            cells[c] = None
        self.index[src] = row
        self._next_row = n + 1
        return row

    def add(self, src: int, dst: int) -> None:
        row = self.index.get(src)
        if row is None:
            row = self._allocate(src)
            if row is None:
                return
        cells, base = self._cells(row)
        assoc = [a for a in cells[base + 1:base + self.width] if a is not None]
        if dst in assoc:
            return
        assoc.append(dst)
        if len(assoc) > self.list_size:
            del assoc[0]
        assoc.extend([None] * (self.list_size - len(assoc)))
        cells[base + 1:base + self.width] = assoc

    def get(self, src: int) -> list[int]:
        row = self.index.get(src)
        if row is None:
            return []
        cells, base = self._cells(row)
        return [a for a in cells[base + 1:base + self.width] if a is not None]

    def items(self) -> Iterator[tuple[int, list[int]]]:
        """(src, associations) in row order."""
        for shard in self.shards:
            for base in range(0, len(shard), self.width):
                src = shard[base]
                if src is not None:
                    assoc = [a for a in shard[base + 1:base + self.width] if a is not None]
                    if assoc:
                        yield src, assoc
