"""Capacity-bounded block cache with LRU/FIFO replacement.

Prefetched blocks that are about to be evicted without ever being hit can
get one second chance: they are moved to the MRU end (queue tail for FIFO)
instead of being dropped. The chance is consumed for the rest of that
residency, so insertion always terminates.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ConfigError

DEMAND = "demand"
PREFETCH = "prefetch"

POLICIES = ("lru", "fifo")


@dataclass
class CacheEntry:
    addr: int
    origin: str = DEMAND
    touched: bool = False
    chance_used: bool = False
    # which prefetcher inserted the block ("mithril", "amp", "pg"), if any
    source: Optional[str] = None


@dataclass
class CacheConfig:
    capacity_blocks: int
    policy: str = "lru"
    second_chance: bool = True
    metadata_charge_blocks: int = 0
    block_size: int = 4096

    def __post_init__(self):
        self.policy = self.policy.lower()
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown replacement policy {self.policy!r}")
        if self.block_size <= 0:
            raise ConfigError("block_size must be positive")

    @property
    def effective_capacity(self) -> int:
        return self.capacity_blocks - self.metadata_charge_blocks

    @property
    def cache_bytes(self) -> int:
        return self.capacity_blocks * self.block_size


class BlockCache:
    """LRU or FIFO block cache.

    The OrderedDict runs from victim end (first) to MRU / tail end (last).
    """

    def __init__(self, config: CacheConfig):
        if config.effective_capacity < 1:
            raise ConfigError(
                f"effective capacity {config.effective_capacity} < 1 "
                f"({config.capacity_blocks} blocks minus {config.metadata_charge_blocks} charged to metadata)"
            )
        self.config = config
        self.capacity = config.effective_capacity
        self._lru = config.policy == "lru"
        self._second_chance = config.second_chance
        self._entries: OrderedDict[int, CacheEntry] = OrderedDict()
        self._evict_hook: Optional[Callable[[CacheEntry], None]] = None
        self._chance_hook: Optional[Callable[[CacheEntry], None]] = None
        self.second_chances = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, addr: int) -> bool:
        return addr in self._entries

    def get(self, addr: int) -> Optional[CacheEntry]:
        """Entry for ``addr`` without touching recency or flags."""
        return self._entries.get(addr)

    def lookup(self, addr: int) -> Optional[CacheEntry]:
        """Demand lookup: the (now touched) entry on a hit, None on a miss."""
        entry = self._entries.get(addr)
        if entry is None:
            return None
        entry.touched = True
        if self._lru:
            self._entries.move_to_end(addr)
        return entry

    def insert(self, addr: int, origin: str = DEMAND, source: Optional[str] = None) -> list[CacheEntry]:
        """Insert ``addr``; return the entries truly evicted to make room."""
        entries = self._entries
        entry = entries.get(addr)
        if entry is not None:
            if origin == DEMAND:
                entry.origin = DEMAND
            if self._lru:
                entries.move_to_end(addr)
            return []

        evicted = []
        while len(entries) >= self.capacity:
            victim_addr, victim = next(iter(entries.items()))
            if (self._second_chance and victim.origin == PREFETCH
                    and not victim.touched and not victim.chance_used):
                victim.chance_used = True
                entries.move_to_end(victim_addr)
                self.second_chances += 1
                if self._chance_hook is not None:
                    self._chance_hook(victim)
                continue
            del entries[victim_addr]
            evicted.append(victim)
            if self._evict_hook is not None:
                self._evict_hook(victim)

        entries[addr] = CacheEntry(addr, origin, source=source if origin == PREFETCH else None)
        return evicted

    def set_eviction_hook(self, callback: Optional[Callable[[CacheEntry], None]]) -> None:
        """Call ``callback(entry)`` once per true eviction."""
        self._evict_hook = callback

    def set_second_chance_hook(self, callback: Optional[Callable[[CacheEntry], None]]) -> None:
        self._chance_hook = callback

    def resident(self) -> list[int]:
        """Resident addresses from victim end to MRU end."""
        return list(self._entries)
