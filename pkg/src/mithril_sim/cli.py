"""Command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 I/O or trace error,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import IO, Iterator, Optional

from . import synth
from .baselines import AmpConfig, PgConfig
from .cache import CacheConfig
from .engine import RECORDING_MODES, MithrilConfig
from .errors import ConfigError, InvariantViolation, TraceError
from .report import summary_line, write_reports, write_rows_csv, write_rows_jsonl
from .simulator import Simulation, StackConfig, analyze_hit_frequency, sweep
from .trace import KINDS, TraceFormat, read_addresses

logger = logging.getLogger("mithril_sim")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("size list is empty")
    return sizes


def _common_parent() -> argparse.ArgumentParser:
    mc = MithrilConfig()
    amp = AmpConfig()
    pg = PgConfig()
    p = _Parser(add_help=False)
    p.add_argument("--config", type=Path, help="key=value file; command-line flags win")
    p.add_argument("-v", "--verbose", action="store_true")

    t = p.add_argument_group("trace")
    t.add_argument("--trace", type=Path)
    t.add_argument("--format", dest="trace_format", choices=KINDS, default="plaintext")
    t.add_argument("--radix", type=int, choices=(10, 16), default=10)
    t.add_argument("--addr-col", type=int, default=0)
    t.add_argument("--offset-col", type=int, default=4)
    t.add_argument("--length-col", type=int, default=5)
    t.add_argument("--op-col", type=int, default=None)
    t.add_argument("--reads-only", action="store_true")
    t.add_argument("--on-parse-error", choices=("fail", "skip"), default="fail")
    t.add_argument("--block-size", type=int, default=4096,
                   help="bytes per block, for extent expansion and metadata charging")

    c = p.add_argument_group("cache")
    c.add_argument("--policy", choices=("lru", "fifo"), default="lru")
    c.add_argument("--size-blocks", type=int, default=65536)
    c.add_argument("--no-second-chance", action="store_true")

    layers = p.add_argument_group("prefetchers")
    layers.add_argument("--mithril", action="store_true", help="enable the association prefetching layer")
    base = layers.add_mutually_exclusive_group()
    base.add_argument("--amp", action="store_true", help="adaptive sequential baseline")
    base.add_argument("--pg", action="store_true", help="probability graph baseline")

    m = p.add_argument_group("mithril")
    m.add_argument("--min-support", type=int, default=mc.min_support)
    m.add_argument("--max-support", type=int, default=mc.max_support)
    m.add_argument("--lookahead", type=int, default=mc.lookahead)
    m.add_argument("--prefetch-list-size", type=int, default=mc.prefetch_list_size)
    m.add_argument("--max-metadata", type=float, default=mc.max_metadata)
    m.add_argument("--recording-rows", type=int, default=mc.recording_table_rows)
    m.add_argument("--mining-rows", type=int, default=mc.mining_table_rows)
    m.add_argument("--recording-mode", choices=RECORDING_MODES, default=mc.recording_mode)

    a = p.add_argument_group("amp")
    a.add_argument("--amp-stream-table", type=int, default=amp.stream_table_size)
    a.add_argument("--amp-seq-threshold", type=int, default=amp.seq_threshold)
    a.add_argument("--amp-initial-degree", type=int, default=amp.initial_degree)
    a.add_argument("--amp-max-degree", type=int, default=amp.max_degree)

    g = p.add_argument_group("pg")
    g.add_argument("--pg-window", type=int, default=pg.window)
    g.add_argument("--pg-threshold", type=float, default=pg.prob_threshold)
    g.add_argument("--pg-max-prefetch", type=int, default=pg.max_prefetch)
    g.add_argument("--pg-max-metadata", type=float, default=pg.max_metadata)

    o = p.add_argument_group("output")
    o.add_argument("-o", "--output", type=Path, default=None, help="output file (default stdout)")
    o.add_argument("--output-format", choices=("csv", "jsonl"), default="csv")
    return p


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="mithril-sim", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_parent()
    sub = {}

    sub["simulate"] = subs.add_parser("simulate", parents=[common], help="run one simulation")

    sp = subs.add_parser("sweep", parents=[common], help="hit ratio curve over cache sizes")
    sp.add_argument("--sizes", type=_sizes, help="comma-separated capacities in blocks")
    sp.add_argument("--jobs", type=int, default=1)
    sub["sweep"] = sp

    sub["dump-associations"] = subs.add_parser(
        "dump-associations", parents=[common], help="prefetch-table contents after a run")
    sub["hitfreq"] = subs.add_parser(
        "hitfreq", parents=[common], help="per-block trace frequency and hit count")

    sy = subs.add_parser("synth", help="write a synthetic workload")
    sy.add_argument("--config", type=Path)
    sy.add_argument("-v", "--verbose", action="store_true")
    sy.add_argument("--kind", choices=synth.WORKLOADS)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("-o", "--output", type=Path)
    sy.add_argument("--trace-format", choices=("plaintext", "binary64", "extent-csv"), default="plaintext")
    sy.add_argument("--block-size", type=int, default=4096)
    sy.add_argument("--pairs", type=int, default=1000)
    sy.add_argument("--recurrences", type=int, default=5)
    sy.add_argument("--gap", type=int, default=0)
    sy.add_argument("--length", type=int, default=100_000)
    sy.add_argument("--streams", type=int, default=4)
    sy.add_argument("--start", type=int, default=0)
    sub["synth"] = sy
    return parser, sub


def _read_config_file(path: Path) -> dict[str, str]:
    values = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


# checked after config-file merging, so a file may supply them
REQUIRED = {
    "simulate": ("trace",),
    "sweep": ("trace", "sizes"),
    "dump-associations": ("trace",),
    "hitfreq": ("trace",),
    "synth": ("kind", "output"),
}


def _check_required(args: argparse.Namespace) -> argparse.Namespace:
    missing = [f"--{name}" for name in REQUIRED[args.command] if getattr(args, name) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {', '.join(missing)}")
    if args.command == "synth" and args.kind not in synth.WORKLOADS:
        raise UsageError(f"synth: --kind must be one of {', '.join(synth.WORKLOADS)}")
    return args


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return _check_required(args)
    sp = sub[args.command]
    actions = {}
    for action in sp._actions:
        actions[action.dest] = action
        for opt in action.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = action
    defaults = {}
    for key, value in _read_config_file(args.config).items():
        action = actions.get(key)
        if action is None or action.dest in ("config", "help"):
            raise UsageError(f"{args.config}: unknown option {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[action.dest] = _bool(value)
        elif action.dest == "sizes":
            defaults[action.dest] = _sizes(value)
        else:
            defaults[action.dest] = value
    # file values become defaults, so explicit flags still win on reparse
    sp.set_defaults(**defaults)
    return _check_required(parser.parse_args(argv))


def trace_format(args) -> TraceFormat:
    return TraceFormat(
        kind=args.trace_format,
        addr_col=args.addr_col,
        offset_col=args.offset_col,
        length_col=args.length_col,
        op_col=args.op_col,
        block_size=args.block_size,
        address_radix=args.radix,
        reads_only=args.reads_only,
        on_parse_error=args.on_parse_error,
    )


def stack_config(args) -> StackConfig:
    mithril = None
    if args.mithril:
        mithril = MithrilConfig(
            min_support=args.min_support,
            max_support=args.max_support,
            lookahead=args.lookahead,
            prefetch_list_size=args.prefetch_list_size,
            max_metadata=args.max_metadata,
            recording_table_rows=args.recording_rows,
            mining_table_rows=args.mining_rows,
            recording_mode=args.recording_mode,
        )
    baseline = "amp" if args.amp else "pg" if args.pg else None
    return StackConfig(
        cache=CacheConfig(
            capacity_blocks=args.size_blocks,
            policy=args.policy,
            second_chance=not args.no_second_chance,
            block_size=args.block_size,
        ),
        baseline=baseline,
        mithril=mithril,
        amp=AmpConfig(args.amp_stream_table, args.amp_seq_threshold, args.amp_initial_degree, args.amp_max_degree),
        pg=PgConfig(args.pg_window, args.pg_threshold, args.pg_max_prefetch, args.pg_max_metadata),
    )


def run_header(args, stack: StackConfig, fmt: TraceFormat) -> dict:
    header = {"command": args.command, "trace": str(args.trace)}
    header.update({f"trace.{k}": v for k, v in asdict(fmt).items()})
    header.update(stack.to_dict())
    return header


@contextlib.contextmanager
def _output(path: Optional[Path]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
    else:
        with path.open("w", newline="") as fh:
            yield fh


def _write(args, fields, rows, header, record: str) -> None:
    with _output(args.output) as fh:
        if args.output_format == "jsonl":
            write_rows_jsonl(fh, fields, rows, header, record=record)
        else:
            write_rows_csv(fh, fields, rows, header)


def cmd_simulate(args) -> int:
    fmt = trace_format(args)
    stack = stack_config(args)
    sim = Simulation(stack)
    sim.feed(read_addresses(args.trace, fmt))
    report = sim.finish()
    header = run_header(args, stack, fmt)
    with _output(args.output) as fh:
        write_reports(fh, [report], header, args.output_format)
    print(summary_line(report), file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


def cmd_sweep(args) -> int:
    fmt = trace_format(args)
    stack = stack_config(args)
    reports = sweep(read_addresses(args.trace, fmt), args.sizes, stack, jobs=args.jobs)
    header = run_header(args, stack, fmt)
    header["sizes"] = ",".join(map(str, args.sizes))
    header.pop("capacity_blocks", None)
    with _output(args.output) as fh:
        write_reports(fh, reports, header, args.output_format)
    return EXIT_OK


def cmd_dump_associations(args) -> int:
    if not args.mithril:
        raise UsageError("dump-associations needs --mithril")
    fmt = trace_format(args)
    stack = stack_config(args)
    sim = Simulation(stack)
    sim.feed(read_addresses(args.trace, fmt))
    sim.finish()
    _write(args, ("src", "dst"), sim.engine.associations(), run_header(args, stack, fmt), "association")
    return EXIT_OK


def cmd_hitfreq(args) -> int:
    fmt = trace_format(args)
    stack = stack_config(args)
    addrs = read_addresses(args.trace, fmt)
    stacks = [replace(stack, baseline=None, mithril=None)]
    if stack.baseline is not None or stack.mithril is not None:
        stacks.append(stack)
    rows = []
    for s in stacks:
        rows.extend((s.label, addr, freq, hits) for addr, freq, hits in analyze_hit_frequency(addrs, s))
    _write(args, ("algorithm", "addr", "frequency", "hit_count"), rows, run_header(args, stack, fmt), "block")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind == "paired":
        addrs = synth.paired(args.pairs, args.recurrences, args.gap, seed=args.seed)
    elif args.kind == "sequential":
        addrs = synth.sequential(args.length, start=args.start)
    else:
        addrs = synth.interleaved(args.length, streams=args.streams, seed=args.seed)
    synth.write_trace(addrs, args.output, kind=args.trace_format, block_size=args.block_size)
    print(f"wrote {len(addrs)} requests to {args.output}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "dump-associations": cmd_dump_associations,
    "hitfreq": cmd_hitfreq,
    "synth": cmd_synth,
}


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TraceError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
