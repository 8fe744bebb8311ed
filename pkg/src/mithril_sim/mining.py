"""Approximate sporadic association mining over timestamp rows."""
from __future__ import annotations

from typing import Iterable, Sequence

from .timestamps import TS_MASK, ts_diff

WEAK = "weak"
STRONG = "strong"


def check_association(row1: Sequence[int], row2: Sequence[int], assoc: str, lookahead: int) -> bool:
    """Whether two blocks' timestamp lists are weakly/strongly associated.

    Weak: equal length and every pair of k-th timestamps within ``lookahead``.
    Strong: weak, plus at least one pair exactly 1 apart.
    """
    if len(row1) != len(row2):
        return False
    consecutive = False
    for a, b in zip(row1, row2):
        d = abs(ts_diff(a, b))
        if d > lookahead:
            return False
        if d == 1:
            consecutive = True
    return True if assoc == WEAK else consecutive


def mine(rows: Iterable[tuple[int, Sequence[int]]], min_support: int, lookahead: int,
         anchor: int = 0) -> list[tuple[int, int]]:
    """Associated pairs among ``rows`` of (addr, timestamps).

    Rows are ordered by their first timestamp, measured as age on the
    15-bit ring starting at ``anchor`` (the oldest representable value);
    ties keep input order. For each row, later rows are scanned until the
    first-timestamp gap exceeds ``lookahead``: the first hit only needs a
    weak association, every further one a strong association.

    Returns ordered pairs, both directions of each association:
    ``[(a, b), (b, a), ...]``.
    """
    keyed = sorted(
        (((ts[0] - anchor) & TS_MASK, addr, ts) for addr, ts in rows if len(ts) > 0),
        key=lambda t: t[0],
    )
    pairs = []
    n = len(keyed)
    for i in range(n - 1):
        key_i, addr_i, ts_i = keyed[i]
        if len(ts_i) < min_support:
            continue
        assoc = WEAK
        for j in range(i + 1, n):
            key_j, addr_j, ts_j = keyed[j]
            if check_association(ts_i, ts_j, assoc, lookahead):
                pairs.append((addr_i, addr_j))
                pairs.append((addr_j, addr_i))
                assoc = STRONG
            if key_j - key_i > lookahead:
                break
    return pairs
