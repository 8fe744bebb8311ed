"""Block cache simulation with timestamp-association prefetching."""
from .baselines import AmpConfig, AmpPrefetcher, PgConfig, ProbabilityGraph
from .cache import DEMAND, PREFETCH, BlockCache, CacheConfig, CacheEntry
from .engine import MithrilConfig, MithrilEngine
from .errors import ConfigError, InvariantViolation, TraceError
from .mining import check_association, mine
from .simulator import Simulation, SimulationReport, StackConfig, analyze_hit_frequency, run, sweep
from .timestamps import TimestampRow, compress_ts, ts_diff
from .trace import BlockRequest, TraceFormat, expand_extent, open_trace, read_addresses

__version__ = "0.1.0"

__all__ = [
    "AmpConfig", "AmpPrefetcher", "PgConfig", "ProbabilityGraph",
    "DEMAND", "PREFETCH", "BlockCache", "CacheConfig", "CacheEntry",
    "MithrilConfig", "MithrilEngine",
    "ConfigError", "InvariantViolation", "TraceError",
    "check_association", "mine",
    "Simulation", "SimulationReport", "StackConfig", "analyze_hit_frequency", "run", "sweep",
    "TimestampRow", "compress_ts", "ts_diff",
    "BlockRequest", "TraceFormat", "expand_extent", "open_trace", "read_addresses",
]
