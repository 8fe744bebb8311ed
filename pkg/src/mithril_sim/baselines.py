"""Baseline prefetchers: adaptive sequential (AMP-style) and probability graph.

Both expose ``on_request(addr, hit) -> list[int]`` and ``on_evict(entry)``,
the same shape the simulator uses for the association engine.

The AMP rules here are an approximation built from its published behaviour:
the degree grows when a stream's consumer outruns the prefetched frontier
and shrinks when a prefetched block is evicted unused.
"""
from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import asdict, dataclass
from typing import Optional

from .cache import CacheEntry
from .errors import ConfigError

# bytes charged per stored (predecessor, successor, count) triple
PG_ENTRY_BYTES = 20
PG_WINDOW_SLOT_BYTES = 8


@dataclass
class AmpConfig:
    stream_table_size: int = 64
    seq_threshold: int = 2
    initial_degree: int = 4
    max_degree: int = 64

    def __post_init__(self):
        if self.stream_table_size < 1 or self.seq_threshold < 1:
            raise ConfigError("stream_table_size and seq_threshold must be >= 1")
        if not 1 <= self.initial_degree <= self.max_degree:
            raise ConfigError("need 1 <= initial_degree <= max_degree")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AmpStream:
    last_addr: int
    degree: int
    frontier: int
    issued: bool = False

    @property
    def trigger(self) -> int:
        """Distance below the frontier at which the next batch is issued."""
        return (self.degree + 1) // 2


class AmpPrefetcher:
    name = "amp"

    def __init__(self, config: Optional[AmpConfig] = None, owner_limit: int = 1 << 16):
        self.config = config or AmpConfig()
        # keyed by the address that would extend the stream
        self.streams: OrderedDict[int, AmpStream] = OrderedDict()
        self._runs: OrderedDict[int, int] = OrderedDict()
        self._owner: dict[int, AmpStream] = {}
        self._owner_limit = owner_limit

    def metadata_bytes(self) -> int:
        return 0

    def on_request(self, addr: int, hit: bool) -> list[int]:
        cfg = self.config
        self._owner.pop(addr, None)
        stream = self.streams.pop(addr, None)
        if stream is None:
            run = self._runs.pop(addr, 0) + 1
            if run >= cfg.seq_threshold:
                self._put(self.streams, addr + 1, AmpStream(addr, cfg.initial_degree, addr))
            else:
                self._put(self._runs, addr + 1, run)
            return []

        # a demand miss on a block this stream already covered: prefetching lagged
        if not hit and stream.issued:
            stream.degree = min(stream.degree + 1, cfg.max_degree)
        decision = []
        if addr >= stream.frontier - stream.trigger:
            start = max(stream.frontier, addr) + 1
            decision = list(range(start, start + stream.degree))
            stream.frontier = decision[-1]
            stream.issued = True
            owner = self._owner
            for a in decision:
                owner[a] = stream
            while len(owner) > self._owner_limit:
                del owner[next(iter(owner))]
        stream.last_addr = addr
        self._put(self.streams, addr + 1, stream)
        return decision

    def on_evict(self, entry: CacheEntry) -> None:
        stream = self._owner.pop(entry.addr, None)
        if stream is not None and not entry.touched:
            stream.degree = max(stream.degree - 1, 1)

    def _put(self, table: OrderedDict, key: int, value) -> None:
        table[key] = value
        table.move_to_end(key)
        if len(table) > self.config.stream_table_size:
            table.popitem(last=False)


@dataclass
class PgConfig:
    window: int = 10
    prob_threshold: float = 0.5
    max_prefetch: int = 2
    max_metadata: float = 0.10

    def __post_init__(self):
        if self.window < 1 or self.max_prefetch < 1:
            raise ConfigError("window and max_prefetch must be >= 1")
        if not 0 < self.prob_threshold <= 1:
            raise ConfigError("prob_threshold must be in (0, 1]")
        if not 0 < self.max_metadata < 1:
            raise ConfigError("max_metadata must be a fraction in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


class ProbabilityGraph:
    """Successor counts over a sliding window of recent requests.

    Every block still in the window when ``addr`` arrives gets an arc to
    ``addr``. Storage is capped at ``max_entries`` arcs; when over, whole
    predecessor nodes are dropped least-recently-used first.
    """

    name = "pg"

    def __init__(self, config: Optional[PgConfig] = None, budget_bytes: Optional[int] = None):
        self.config = cfg = config or PgConfig()
        self.window: deque[int] = deque(maxlen=cfg.window)
        self.counts: OrderedDict[int, dict[int, int]] = OrderedDict()
        self.entries = 0
        self.max_entries: Optional[int] = None
        if budget_bytes is not None:
            spare = budget_bytes - cfg.window * PG_WINDOW_SLOT_BYTES
            if spare < PG_ENTRY_BYTES:
                raise ConfigError(f"metadata budget {budget_bytes} bytes too small for the probability graph")
            self.max_entries = spare // PG_ENTRY_BYTES
        self.pruned_nodes = 0

    def metadata_bytes(self) -> int:
        return self.entries * PG_ENTRY_BYTES + self.config.window * PG_WINDOW_SLOT_BYTES

    def max_metadata_bytes(self) -> Optional[int]:
        if self.max_entries is None:
            return None
        return self.max_entries * PG_ENTRY_BYTES + self.config.window * PG_WINDOW_SLOT_BYTES

    def on_request(self, addr: int, hit: bool = False) -> list[int]:
        counts = self.counts
        for q in dict.fromkeys(self.window):
            if q == addr:
                continue
            node = counts.get(q)
            if node is None:
                node = counts[q] = {}
            else:
                counts.move_to_end(q)
            if addr not in node:
                self.entries += 1
                node[addr] = 1
            else:
                node[addr] += 1
        if self.max_entries is not None:
            while self.entries > self.max_entries:
                _, node = counts.popitem(last=False)
                self.entries -= len(node)
                self.pruned_nodes += 1
        self.window.append(addr)
        return self.predict(addr)

    def predict(self, addr: int) -> list[int]:
        node = self.counts.get(addr)
        if not node:
            return []
        self.counts.move_to_end(addr)
        total = sum(node.values())
        threshold = self.config.prob_threshold
        ranked = sorted(node.items(), key=lambda kv: -kv[1])
        return [s for s, c in ranked if c / total >= threshold][:self.config.max_prefetch]

    def probabilities(self, addr: int) -> dict[int, float]:
        node = self.counts.get(addr, {})
        total = sum(node.values())
        return {s: c / total for s, c in node.items()} if total else {}

    def on_evict(self, entry: CacheEntry) -> None:
        pass
