"""Block I/O trace readers.

Every supported format is turned into a stream of :class:`BlockRequest`
objects whose ``seq`` runs 0..N-1 and whose ``addr`` is a block index.

Formats
-------
plaintext
    One address per line, decimal or hex (``address_radix``).
csv
    Comma separated; the address column is ``addr_col``.
binary64
    Packed little-endian unsigned 64-bit addresses, no header.
extent-csv
    MSR-Cambridge style rows
    ``timestamp,host,disk,op,offset,length,latency``; each row is expanded
    into the blocks it touches using ``block_size``.
"""
from __future__ import annotations

import csv
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, NamedTuple, Optional, Union

from .errors import ConfigError, TraceError

logger = logging.getLogger(__name__)

KINDS = ("plaintext", "csv", "binary64", "extent-csv")

_U64 = struct.Struct("<Q")
_U64_MAX = (1 << 64) - 1


class BlockRequest(NamedTuple):
    seq: int
    addr: int


@dataclass(frozen=True)
class TraceFormat:
    """How to interpret a trace file.

    Column indices are 0-based. ``op_col`` may be None when the trace
    carries no read/write field; ``reads_only`` then has no effect.
    """

    kind: str = "plaintext"
    addr_col: int = 0
    offset_col: int = 4
    length_col: int = 5
    op_col: Optional[int] = None
    block_size: int = 4096
    address_radix: int = 10
    reads_only: bool = False
    on_parse_error: str = "fail"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown trace kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.address_radix not in (10, 16):
            raise ConfigError("address_radix must be 10 or 16")
        if self.kind == "extent-csv" and self.block_size <= 0:
            raise ConfigError("block_size must be positive for extent-csv traces")
        if self.on_parse_error not in ("fail", "skip"):
            raise ConfigError("on_parse_error must be 'fail' or 'skip'")

    @classmethod
    def msr(cls, block_size: int = 4096, **kw) -> "TraceFormat":
        """Column layout of the MSR Cambridge traces."""
        return cls(kind="extent-csv", offset_col=4, length_col=5, op_col=3, block_size=block_size, **kw)


def expand_extent(offset: int, length: int, block_size: int) -> list[int]:
    """Block indices touched by ``length`` bytes at byte ``offset``.

    A zero-length extent still touches the block containing ``offset``.
    """
    first = offset // block_size
    last = (offset + max(length, 1) - 1) // block_size
    return list(range(first, last + 1))


def _parse_addr(text: str, radix: int) -> int:
    value = int(text.strip(), radix)
    if value < 0 or value > _U64_MAX:
        raise ValueError(f"address {value} outside unsigned 64-bit range")
    return value


def _is_write(op: str) -> bool:
    return op.strip().lower().startswith("w")


class TraceReader:
    """Sequential reader over one trace file.

    Iterate it, or call :meth:`next_request` until it returns None.
    """

    def __init__(self, path: Union[str, Path], fmt: TraceFormat):
        self.path = Path(path)
        self.fmt = fmt
        binary = fmt.kind == "binary64"
        self._fh: IO = open(self.path, "rb" if binary else "r", newline=None if binary else "")
        self._seq = 0
        self._pending: list[int] = []
        self._records = self._binary_records() if binary else self._text_records()

    # record generators yield (record number, block list or error message)
    def _text_records(self) -> Iterator[tuple[int, Union[list[int], str]]]:
        fmt = self.fmt
        if fmt.kind == "plaintext":
            for lineno, line in enumerate(self._fh, 1):
                if not line.strip():
                    continue
                try:
                    yield lineno, [_parse_addr(line, fmt.address_radix)]
                except ValueError as exc:
                    yield lineno, str(exc)
            return

        for lineno, row in enumerate(csv.reader(self._fh), 1):
            if not row or not "".join(row).strip():
                continue
            try:
                if fmt.op_col is not None and fmt.reads_only and _is_write(row[fmt.op_col]):
                    continue
                if fmt.kind == "csv":
                    blocks = [_parse_addr(row[fmt.addr_col], fmt.address_radix)]
                else:
                    offset = int(row[fmt.offset_col].strip(), fmt.address_radix)
                    length = int(row[fmt.length_col].strip())
                    if offset < 0 or length < 0:
                        raise ValueError("negative offset or length")
                    blocks = expand_extent(offset, length, fmt.block_size)
            except (ValueError, IndexError) as exc:
                yield lineno, f"{exc} in {row!r}"
            else:
                yield lineno, blocks

    def _binary_records(self) -> Iterator[tuple[int, Union[list[int], str]]]:
        recno = 0
        while True:
            chunk = self._fh.read(_U64.size * 4096)
            if not chunk:
                return
            usable = len(chunk) - len(chunk) % _U64.size
            for (addr,) in _U64.iter_unpack(chunk[:usable]):
                recno += 1
                yield recno, [addr]
            if usable != len(chunk):
                yield recno + 1, f"truncated {len(chunk) - usable}-byte trailing record"
                return

    def next_request(self) -> Optional[BlockRequest]:
        """Next request, or None at end of stream.

        A malformed record raises TraceError (``on_parse_error="fail"``) or
        is logged and skipped; either way the reader stays usable.
        """
        while not self._pending:
            try:
                lineno, record = next(self._records)
            except StopIteration:
                return None
            if isinstance(record, str):
                if self.fmt.on_parse_error == "fail":
                    raise TraceError(f"{self.path}: {record}", line=lineno)
                logger.warning("skipping malformed record at %s:%d: %s", self.path, lineno, record)
                continue
            self._pending = record[::-1]
        req = BlockRequest(self._seq, self._pending.pop())
        self._seq += 1
        return req

    def __iter__(self) -> Iterator[BlockRequest]:
        while (req := self.next_request()) is not None:
            yield req

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TraceReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_trace(path: Union[str, Path], fmt: TraceFormat | None = None) -> TraceReader:
    """Open ``path`` for reading. Raises OSError if it cannot be opened."""
    return TraceReader(path, fmt or TraceFormat())


def read_addresses(path: Union[str, Path], fmt: TraceFormat | None = None) -> list[int]:
    """Whole trace as a list of block addresses."""
    with open_trace(path, fmt) as reader:
        return [req.addr for req in reader]
