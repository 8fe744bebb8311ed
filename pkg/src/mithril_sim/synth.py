"""Seeded synthetic workloads and trace writers."""
from __future__ import annotations

import random
import struct
from pathlib import Path
from typing import Iterable, Union

from .errors import ConfigError

ADDR_SPACE = 1 << 32
WORKLOADS = ("paired", "sequential", "interleaved")


def _distinct(rng: random.Random, n: int) -> list[int]:
    return rng.sample(range(ADDR_SPACE), n)


def paired(pairs: int = 1000, recurrences: int = 5, gap: int = 0, seed: int = 0) -> list[int]:
    """``pairs`` block pairs (a_i, b_i), the whole set replayed ``recurrences`` times.

    Pair order is a seeded permutation that stays fixed across rounds, so
    every block's reuse distance is the full round (``2 * pairs`` distinct
    blocks, plus fillers). ``gap`` fresh single-use blocks sit between a_i
    and b_i.
    """
    if pairs < 1 or recurrences < 1 or gap < 0:
        raise ConfigError("paired workload needs pairs >= 1, recurrences >= 1, gap >= 0")
    rng = random.Random(seed)
    addrs = _distinct(rng, 2 * pairs + gap * pairs * recurrences)
    a, b, fillers = addrs[:pairs], addrs[pairs:2 * pairs], iter(addrs[2 * pairs:])
    order = list(range(pairs))
    rng.shuffle(order)
    trace = []
    for _ in range(recurrences):
        for i in order:
            trace.append(a[i])
            trace.extend(next(fillers) for _ in range(gap))
            trace.append(b[i])
    return trace


def sequential(length: int, start: int = 0) -> list[int]:
    return list(range(start, start + length))


def interleaved(length: int, streams: int = 4, seed: int = 0) -> list[int]:
    """``streams`` sequential runs from random bases, interleaved at random."""
    if streams < 1:
        raise ConfigError("interleaved workload needs streams >= 1")
    rng = random.Random(seed)
    cursors = [rng.randrange(ADDR_SPACE // 2) for _ in range(streams)]
    trace = []
    for _ in range(length):
        s = rng.randrange(streams)
        trace.append(cursors[s])
        cursors[s] += 1
    return trace


def generate(kind: str, seed: int = 0, **params) -> list[int]:
    if kind == "paired":
        return paired(seed=seed, **params)
    if kind == "sequential":
        return sequential(**params)
    if kind == "interleaved":
        return interleaved(seed=seed, **params)
    raise ConfigError(f"unknown workload {kind!r}; expected one of {', '.join(WORKLOADS)}")


def write_trace(addrs: Iterable[int], path: Union[str, Path], kind: str = "plaintext",
                block_size: int = 4096) -> None:
    """Write addresses as plaintext, binary64 or MSR-style extent-csv."""
    path = Path(path)
    if kind == "plaintext":
        with path.open("w") as fh:
            fh.writelines(f"{a}\n" for a in addrs)
    elif kind == "binary64":
        with path.open("wb") as fh:
            fh.write(b"".join(struct.pack("<Q", a) for a in addrs))
    elif kind == "extent-csv":
        with path.open("w") as fh:
            fh.writelines(
                f"{i},synth,0,Read,{a * block_size},{block_size},0\n" for i, a in enumerate(addrs)
            )
    else:
        raise ConfigError(f"cannot write trace kind {kind!r}")
