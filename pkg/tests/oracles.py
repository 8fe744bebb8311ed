"""Reference models used as independent oracles.

None of these import the package's cache, table or mining code; they work
on plain lists and raw (uncompressed) timestamps.
"""
from __future__ import annotations

import math
from collections import OrderedDict, deque


def textbook_lru(trace, capacity):
    """Hit/miss list from a list-based LRU (MRU at the end)."""
    stack, out = [], []
    for a in trace:
        if a in stack:
            stack.remove(a)
            stack.append(a)
            out.append(True)
        else:
            if len(stack) >= capacity:
                stack.pop(0)
            stack.append(a)
            out.append(False)
    return out


def textbook_fifo(trace, capacity):
    queue, members, out = deque(), set(), []
    for a in trace:
        if a in members:
            out.append(True)
            continue
        if len(queue) >= capacity:
            members.discard(queue.popleft())
        queue.append(a)
        members.add(a)
        out.append(False)
    return out


def mining_snapshot(stream, min_support, max_support):
    """Mining-table rows for ``stream`` recorded at timestamps 0, 1, 2, ...

    Assumes tables large enough that nothing is overwritten and mining never
    fires. Rows appear in the order blocks reach ``min_support`` and keep at
    most ``max_support`` timestamps.
    """
    seen = {}
    order = []
    for t, a in enumerate(stream):
        ts = seen.setdefault(a, [])
        if len(ts) < max_support:
            ts.append(t)
        if len(ts) == min_support and a not in order:
            order.append(a)
    return [(a, seen[a]) for a in order]


def _weak(r1, r2, delta):
    return len(r1) == len(r2) and all(abs(x - y) <= delta for x, y in zip(r1, r2))


def _strong(r1, r2, delta):
    return _weak(r1, r2, delta) and any(abs(x - y) == 1 for x, y in zip(r1, r2))


def brute_force_pairs(rows, min_support, delta):
    """Every ordered pair produced by weak-then-strong acceptance.

    Rows are ranked by first timestamp; for each row every later row is
    examined (no early exit), the first acceptance under the weak rule and
    later ones under the strong rule.
    """
    ranked = sorted(range(len(rows)), key=lambda k: (rows[k][1][0], k))
    pairs = set()
    for pos, i in enumerate(ranked):
        ai, ti = rows[i]
        if len(ti) < min_support:
            continue
        need_strong = False
        for j in ranked[pos + 1:]:
            aj, tj = rows[j]
            ok = _strong(ti, tj, delta) if need_strong else _weak(ti, tj, delta)
            if ok:
                pairs.add((ai, aj))
                pairs.add((aj, ai))
                need_strong = True
    return pairs


def reference_mithril_lru(trace, capacity, *, min_support=4, max_support=8, delta=50, list_size=2,
                          max_metadata=0.10, recording_rows=100_000, mining_rows=1250,
                          block_size=4096, second_chance=True):
    """Straight-line Mithril-over-LRU simulation, miss-only recording.

    Returns (hits, effective_capacity, per-block hit counts).
    """
    # metadata charge: packed 15-bit timestamps, 12-byte index entries, 2000-row shards
    fixed = (recording_rows * math.ceil(min_support / 4) * 8 + recording_rows * 12
             + mining_rows * math.ceil(max_support / 4) * 8 + mining_rows * 12)
    shard = 2000 * (1 + list_size) * 8 + 2000 * 12
    budget = int(max_metadata * capacity * block_size)
    shards = (budget - fixed) // shard
    assert shards >= 0
    cap = capacity - math.ceil((fixed + shards * shard) / block_size)
    max_rows = shards * 2000

    cache = OrderedDict()

    def insert(addr, prefetched):
        while len(cache) >= cap:
            victim = next(iter(cache))
            e = cache[victim]
            if second_chance and e["pf"] and not e["touched"] and not e["chance"]:
                e["chance"] = True
                cache.move_to_end(victim)
                continue
            del cache[victim]
        cache[addr] = {"pf": prefetched, "touched": False, "chance": False}

    slots = [None] * recording_rows
    slot_of = {}
    rec = {}
    cursor = 0
    mining = []
    mining_pos = {}
    ptable = {}
    src_fifo = deque()

    def add_assoc(src, dst):
        if src not in ptable:
            if max_rows == 0:
                return
            if len(ptable) >= max_rows:
                del ptable[src_fifo.popleft()]
            ptable[src] = []
            src_fifo.append(src)
        row = ptable[src]
        if dst in row:
            return
        row.append(dst)
        if len(row) > list_size:
            row.pop(0)

    def run_mining():
        ranked = sorted(range(len(mining)), key=lambda k: (mining[k][1][0], k))
        for pos, i in enumerate(ranked):
            ai, ti = mining[i]
            if len(ti) < min_support:
                continue
            need_strong = False
            for j in ranked[pos + 1:]:
                aj, tj = mining[j]
                ok = _strong(ti, tj, delta) if need_strong else _weak(ti, tj, delta)
                if ok:
                    add_assoc(ai, aj)
                    add_assoc(aj, ai)
                    need_strong = True
                if tj[0] - ti[0] > delta:
                    break
        mining.clear()
        mining_pos.clear()

    def record(addr, ts):
        nonlocal cursor
        if addr in mining_pos:
            row = mining[mining_pos[addr]][1]
            if len(row) < max_support:
                row.append(ts)
            return
        if addr not in rec:
            old = slots[cursor]
            if old is not None:
                del rec[old]
                del slot_of[old]
            slots[cursor] = addr
            slot_of[addr] = cursor
            rec[addr] = []
            cursor = (cursor + 1) % recording_rows
        rec[addr].append(ts)
        if len(rec[addr]) < min_support:
            return
        row = rec.pop(addr)
        slot = slot_of.pop(addr)
        last = (cursor - 1) % recording_rows
        if last != slot and slots[last] is not None:
            moved = slots[last]
            slots[slot] = moved
            slot_of[moved] = slot
            slot = last
        slots[slot] = None
        cursor = last
        mining_pos[addr] = len(mining)
        mining.append((addr, row))
        if len(mining) >= mining_rows:
            run_mining()

    clock = 0
    hits = 0
    block_hits = {}
    for addr in trace:
        e = cache.get(addr)
        if e is not None:
            hits += 1
            block_hits[addr] = block_hits.get(addr, 0) + 1
            e["touched"] = True
            e["pf"] = False
            cache.move_to_end(addr)
        else:
            insert(addr, False)
            record(addr, clock)
            clock += 1
        for a in ptable.get(addr, []):
            if a != addr and a not in cache:
                insert(a, True)
    return hits, cap, block_hits
