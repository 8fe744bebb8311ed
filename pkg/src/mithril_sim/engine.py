"""History-based prefetching layer driven by timestamp association mining.

Recorded events get consecutive logical timestamps. Blocks that collect
``min_support`` timestamps in the recording table move to the mining table;
when that fills, associated pairs are mined into the prefetch table and the
mining table starts over. Every request looks its block up in the prefetch
table and returns the associated blocks as prefetch candidates.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Iterator, Optional

from .errors import ConfigError, InvariantViolation
from .mining import mine
from .tables import MiningTable, PrefetchTable, RecordingTable
from .timestamps import COUNT_MAX, compress_ts

logger = logging.getLogger(__name__)

RECORDING_MODES = ("miss_only", "every_request", "evict_only", "miss_and_evict")


@dataclass
class MithrilConfig:
    min_support: int = 4
    max_support: int = 8
    lookahead: int = 50
    prefetch_list_size: int = 2
    max_metadata: float = 0.10
    recording_table_rows: int = 100_000
    mining_table_rows: int = 1250
    recording_mode: str = "miss_only"

    def __post_init__(self):
        if not 1 <= self.min_support <= self.max_support <= COUNT_MAX:
            raise ConfigError(f"need 1 <= min_support <= max_support <= {COUNT_MAX}, got "
                              f"{self.min_support}, {self.max_support}")
        if self.lookahead < 1:
            raise ConfigError("lookahead must be >= 1")
        if self.prefetch_list_size < 1:
            raise ConfigError("prefetch_list_size must be >= 1")
        if not 0 < self.max_metadata < 1:
            raise ConfigError("max_metadata must be a fraction in (0, 1)")
        if self.recording_table_rows < 0 or self.mining_table_rows < 0:
            raise ConfigError("table sizes must be non-negative")
        if self.recording_mode not in RECORDING_MODES:
            raise ConfigError(f"unknown recording_mode {self.recording_mode!r}")

    def to_dict(self) -> dict:
        return asdict(self)


class MithrilEngine:
    """The prefetching layer itself; knows nothing about the cache.

    ``budget_bytes`` caps total metadata (``max_metadata`` times the cache
    size in bytes). The fixed recording/mining tables must fit in it and the
    remainder bounds the number of prefetch-table shards. Without a budget
    shards are unbounded.
    """

    def __init__(self, config: Optional[MithrilConfig] = None, budget_bytes: Optional[int] = None):
        self.config = cfg = config or MithrilConfig()
        self.rtable = RecordingTable(cfg.recording_table_rows, cfg.min_support)
        self.mtable = MiningTable(cfg.mining_table_rows, cfg.max_support)
        self.budget_bytes = budget_bytes
        max_shards = None
        if budget_bytes is not None:
            spare = budget_bytes - self.fixed_bytes()
            if spare < 0:
                raise ConfigError(
                    f"recording+mining tables need {self.fixed_bytes()} bytes but the metadata budget "
                    f"is {budget_bytes}; shrink the tables or grow the cache"
                )
            max_shards = spare // PrefetchTable.shard_bytes(cfg.prefetch_list_size)
            if max_shards == 0:
                logger.warning("metadata budget leaves no room for a prefetch-table shard")
        self.ptable = PrefetchTable(cfg.prefetch_list_size, max_shards)
        self._record_on_miss = cfg.recording_mode in ("miss_only", "miss_and_evict")
        self._record_always = cfg.recording_mode == "every_request"
        self._record_on_evict = cfg.recording_mode in ("evict_only", "miss_and_evict")
        self.clock = 0
        self.minings = 0
        self.pairs_mined = 0

    # -- space accounting -------------------------------------------------

    def fixed_bytes(self) -> int:
        return self.rtable.nbytes() + self.mtable.nbytes()

    def metadata_bytes(self) -> int:
        return self.fixed_bytes() + self.ptable.nbytes()

    def max_metadata_bytes(self) -> Optional[int]:
        """Metadata footprint once every allowed shard is allocated."""
        if self.ptable.max_shards is None:
            return None
        shard = PrefetchTable.shard_bytes(self.config.prefetch_list_size)
        return self.fixed_bytes() + self.ptable.max_shards * shard

    # -- recording ----------------------------------------------------------

    def record(self, addr: int, now: int) -> None:
        ts = compress_ts(now)
        mtable = self.mtable
        if addr in mtable.index:
            mtable.append(addr, ts)
            return
        row = self.rtable.append(addr, ts)
        if row is None:
            return
        if mtable.rows == 0:
            return
        mtable.add_row(addr, row)
        if mtable.full:
            self.mine_now()

    def mine_now(self) -> None:
        """Mine the current mining table into the prefetch table, then clear it."""
        cfg = self.config
        pairs = mine(self.mtable.rows_view(), cfg.min_support, cfg.lookahead, anchor=self.mtable.anchor)
        for src, dst in pairs:
            self.ptable.add(src, dst)
        self.mtable.clear()
        self.minings += 1
        self.pairs_mined += len(pairs) // 2
        if self.budget_bytes is not None and self.metadata_bytes() > self.budget_bytes:
            raise InvariantViolation(
                f"metadata {self.metadata_bytes()} bytes exceeds budget {self.budget_bytes}"
            )

    def _record_event(self, addr: int) -> None:
        self.record(addr, self.clock)
        self.clock += 1

    # -- request path -------------------------------------------------------

    def handle(self, addr: int, hit: bool) -> list[int]:
        """Record ``addr`` if the recording mode says so; return prefetch candidates."""
        if self._record_always or (not hit and self._record_on_miss):
            self._record_event(addr)
        return self.ptable.get(addr)

    def on_evict(self, addr: int) -> None:
        if self._record_on_evict:
            self._record_event(addr)

    @property
    def records_evictions(self) -> bool:
        return self._record_on_evict

    def add_association(self, src: int, dst: int) -> None:
        if src != dst:
            self.ptable.add(src, dst)

    def associations(self) -> Iterator[tuple[int, int]]:
        """Current prefetch-table contents as (src, dst) pairs."""
        for src, assoc in self.ptable.items():
            for dst in assoc:
                yield src, dst
