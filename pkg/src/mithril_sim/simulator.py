"""Trace replay through a cache plus optional prefetching layers."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .baselines import AmpConfig, AmpPrefetcher, PgConfig, ProbabilityGraph
from .cache import DEMAND, PREFETCH, BlockCache, CacheConfig, CacheEntry
from .engine import MithrilConfig, MithrilEngine
from .errors import ConfigError, InvariantViolation
from .trace import BlockRequest

logger = logging.getLogger(__name__)

BASELINES = ("amp", "pg")
LAYERS = ("mithril", "amp", "pg")

Trace = Iterable[Union[int, BlockRequest]]


@dataclass
class StackConfig:
    """Cache policy plus optional baseline prefetcher and Mithril layer.

    Mithril sees every demand request with its hit/miss outcome; the
    baseline sees the same requests. Both insert prefetches into the one
    cache, Mithril's first.
    """

    cache: CacheConfig
    baseline: Optional[str] = None
    mithril: Optional[MithrilConfig] = None
    amp: AmpConfig = field(default_factory=AmpConfig)
    pg: PgConfig = field(default_factory=PgConfig)

    def __post_init__(self):
        if self.baseline is not None:
            self.baseline = self.baseline.lower()
            if self.baseline not in BASELINES:
                raise ConfigError(f"unknown baseline {self.baseline!r}; expected amp or pg")

    @property
    def label(self) -> str:
        base = self.baseline or self.cache.policy
        return f"mithril-{base}" if self.mithril is not None else base

    def with_capacity(self, capacity_blocks: int) -> "StackConfig":
        return replace(self, cache=replace(self.cache, capacity_blocks=capacity_blocks))

    def to_dict(self) -> dict:
        d = {
            "algorithm": self.label,
            "policy": self.cache.policy,
            "capacity_blocks": self.cache.capacity_blocks,
            "block_size": self.cache.block_size,
            "second_chance": self.cache.second_chance,
            "baseline": self.baseline or "none",
            "mithril": self.mithril is not None,
        }
        if self.mithril is not None:
            d.update({f"mithril.{k}": v for k, v in self.mithril.to_dict().items()})
        if self.baseline == "amp":
            d.update({f"amp.{k}": v for k, v in self.amp.to_dict().items()})
        if self.baseline == "pg":
            d.update({f"pg.{k}": v for k, v in self.pg.to_dict().items()})
        return d


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass
class SimulationReport:
    algorithm: str
    capacity_blocks: int
    effective_capacity: int
    metadata_charge_blocks: int
    requests: int = 0
    hits: int = 0
    cold_misses: int = 0
    prefetch_candidates: int = 0
    prefetches_issued: int = 0
    prefetched_used: int = 0
    prefetched_evicted_unused: int = 0
    second_chances: int = 0
    metadata_bytes: int = 0
    layer_issued: dict = field(default_factory=lambda: dict.fromkeys(LAYERS, 0))
    layer_used: dict = field(default_factory=lambda: dict.fromkeys(LAYERS, 0))

    @property
    def misses(self) -> int:
        return self.requests - self.hits

    @property
    def hit_ratio(self) -> float:
        return _ratio(self.hits, self.requests)

    @property
    def precision(self) -> float:
        """Used prefetches over prefetches actually inserted."""
        return _ratio(self.prefetched_used, self.prefetches_issued)

    @property
    def max_obtainable_hit_ratio(self) -> float:
        return 1.0 - _ratio(self.cold_misses, self.requests) if self.requests else 0.0

    def to_dict(self) -> dict:
        d = {
            "algorithm": self.algorithm,
            "capacity_blocks": self.capacity_blocks,
            "effective_capacity": self.effective_capacity,
            "metadata_charge_blocks": self.metadata_charge_blocks,
            "requests": self.requests,
            "hits": self.hits,
            "misses": self.misses,
            "cold_misses": self.cold_misses,
            "hit_ratio": self.hit_ratio,
            "max_obtainable_hit_ratio": self.max_obtainable_hit_ratio,
            "prefetch_candidates": self.prefetch_candidates,
            "prefetches_issued": self.prefetches_issued,
            "prefetched_used": self.prefetched_used,
            "precision": self.precision,
            "prefetched_evicted_unused": self.prefetched_evicted_unused,
            "second_chances": self.second_chances,
            "metadata_bytes": self.metadata_bytes,
        }
        for layer in LAYERS:
            d[f"{layer}_issued"] = self.layer_issued[layer]
            d[f"{layer}_used"] = self.layer_used[layer]
        return d


class Simulation:
    """One stack instance; feed it requests, then call :meth:`finish`.

    Metadata of the configured layers is charged against the cache up
    front, at its maximum size, before any request is served.
    """

    def __init__(self, stack: StackConfig, track_blocks: bool = False):
        self.stack = stack
        cache_cfg = stack.cache
        cache_bytes = cache_cfg.cache_bytes
        charge = 0
        self.engine: Optional[MithrilEngine] = None
        self.baseline: Optional[Union[AmpPrefetcher, ProbabilityGraph]] = None
        self.budgets: dict[str, int] = {}
        if stack.mithril is not None:
            budget = int(stack.mithril.max_metadata * cache_bytes)
            self.engine = MithrilEngine(stack.mithril, budget_bytes=budget)
            self.budgets["mithril"] = budget
            charge += self.engine.max_metadata_bytes()
        if stack.baseline == "amp":
            self.baseline = AmpPrefetcher(stack.amp)
        elif stack.baseline == "pg":
            budget = int(stack.pg.max_metadata * cache_bytes)
            self.baseline = ProbabilityGraph(stack.pg, budget_bytes=budget)
            self.budgets["pg"] = budget
            charge += self.baseline.max_metadata_bytes()
        charge_blocks = math.ceil(charge / cache_cfg.block_size)
        self.cache = BlockCache(replace(cache_cfg, metadata_charge_blocks=charge_blocks))
        self.cache.set_eviction_hook(self._on_evict)
        self.report = SimulationReport(
            algorithm=stack.label,
            capacity_blocks=cache_cfg.capacity_blocks,
            effective_capacity=self.cache.capacity,
            metadata_charge_blocks=charge_blocks,
        )
        self._seen: set[int] = set()
        self.block_hits: Optional[dict[int, int]] = {} if track_blocks else None
        self.block_freq: Optional[dict[int, int]] = {} if track_blocks else None

    def _on_evict(self, entry: CacheEntry) -> None:
        if entry.origin == PREFETCH:
            self.report.prefetched_evicted_unused += 1
            if entry.source == "amp":
                self.baseline.on_evict(entry)
        if self.engine is not None and self.engine.records_evictions:
            self.engine.on_evict(entry.addr)

    def _prefetch(self, candidates: Sequence[int], layer: str, trigger: int) -> None:
        cache = self.cache
        report = self.report
        report.prefetch_candidates += len(candidates)
        for a in candidates:
            if a == trigger or a in cache:
                continue
            cache.insert(a, PREFETCH, layer)
            report.prefetches_issued += 1
            report.layer_issued[layer] += 1

    def feed(self, trace: Trace) -> None:
        cache = self.cache
        report = self.report
        engine = self.engine
        baseline = self.baseline
        seen = self._seen
        block_hits = self.block_hits
        block_freq = self.block_freq
        requests = hits = cold = 0
        for addr in trace:
            if type(addr) is not int:
                addr = addr.addr
            requests += 1
            entry = cache.lookup(addr)
            if entry is not None:
                hits += 1
                hit = True
                if entry.origin == PREFETCH:
                    report.prefetched_used += 1
                    report.layer_used[entry.source] += 1
                    entry.origin = DEMAND
                if block_hits is not None:
                    block_hits[addr] = block_hits.get(addr, 0) + 1
            else:
                hit = False
                if addr not in seen:
                    seen.add(addr)
                    cold += 1
                cache.insert(addr, DEMAND)
            if block_freq is not None:
                block_freq[addr] = block_freq.get(addr, 0) + 1
            if engine is not None:
                candidates = engine.handle(addr, hit)
                if candidates:
                    self._prefetch(candidates, "mithril", addr)
            if baseline is not None:
                candidates = baseline.on_request(addr, hit)
                if candidates:
                    self._prefetch(candidates, baseline.name, addr)
        report.requests += requests
        report.hits += hits
        report.cold_misses += cold

    def metadata_bytes(self) -> int:
        total = 0
        if self.engine is not None:
            total += self.engine.metadata_bytes()
        if isinstance(self.baseline, ProbabilityGraph):
            total += self.baseline.metadata_bytes()
        return total

    def check_invariants(self) -> None:
        r = self.report
        if self.engine is not None and self.engine.metadata_bytes() > self.budgets["mithril"]:
            raise InvariantViolation(
                f"Mithril metadata {self.engine.metadata_bytes()} B exceeds budget {self.budgets['mithril']} B"
            )
        if isinstance(self.baseline, ProbabilityGraph) and self.baseline.metadata_bytes() > self.budgets["pg"]:
            raise InvariantViolation(
                f"PG metadata {self.baseline.metadata_bytes()} B exceeds budget {self.budgets['pg']} B"
            )
        if len(self.cache) > self.cache.capacity:
            raise InvariantViolation("cache holds more blocks than its effective capacity")
        if r.cold_misses > r.misses:
            raise InvariantViolation("cold misses exceed misses")
        if r.prefetched_used > r.prefetches_issued:
            raise InvariantViolation("more prefetches used than issued")
        # a history-only prefetcher cannot turn a first access into a hit
        if self.baseline is None and r.hits > r.requests - r.cold_misses:
            raise InvariantViolation("hit ratio exceeds 1 - cold miss ratio")

    def finish(self) -> SimulationReport:
        self.report.second_chances = self.cache.second_chances
        self.report.metadata_bytes = self.metadata_bytes()
        self.check_invariants()
        return self.report


def run(trace: Trace, stack: StackConfig) -> SimulationReport:
    sim = Simulation(stack)
    sim.feed(trace)
    return sim.finish()


def _run_materialized(args: tuple[list[int], StackConfig]) -> SimulationReport:
    trace, stack = args
    return run(trace, stack)


def sweep(trace: Trace, sizes: Sequence[int], stack: StackConfig, jobs: int = 1) -> list[SimulationReport]:
    """One independent run per cache size (in blocks), reports in size order."""
    sizes = list(sizes)
    if not sizes:
        raise ConfigError("sweep needs at least one cache size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("sweep sizes must be strictly increasing")
    addrs = [a if type(a) is int else a.addr for a in trace]
    stacks = [stack.with_capacity(s) for s in sizes]
    if jobs > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_materialized, [(addrs, s) for s in stacks]))
    return [run(addrs, s) for s in stacks]


def analyze_hit_frequency(trace: Trace, stack: StackConfig) -> list[tuple[int, int, int]]:
    """(addr, trace frequency, hit count) per distinct block.

    Sorted by frequency descending, then address.
    """
    sim = Simulation(stack, track_blocks=True)
    sim.feed(trace)
    sim.finish()
    rows = [(addr, freq, sim.block_hits.get(addr, 0)) for addr, freq in sim.block_freq.items()]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows
