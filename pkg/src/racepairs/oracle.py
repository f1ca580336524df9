"""Brute-force ground truth for the schedulable happens-before relation.

Every base edge (program order, write-read dependency, release-acquire
dependency, fork order, join order) is materialised and closed with
Warshall's algorithm over bitset rows. Cubic, so test-scale traces only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .trace import Event, Kind, Trace


class Category(enum.Enum):
    WW = "WW"  # concurrent write/write
    WR = "WR"  # concurrent write, then read
    RW = "RW"  # concurrent read, then write
    WRD = "WRD"  # cross-thread write-read dependency, nothing in between

    @property
    def concurrent(self) -> bool:
        return self is not Category.WRD


def categorize(first: Event, second: Event) -> Category:
    if first.is_write:
        return Category.WW if second.is_write else Category.WR
    return Category.RW


@dataclass(frozen=True, slots=True)
class RacePair:
    first: Event
    second: Event
    category: Category
    # 1 = found by the linear pass, 2 = found by post-processing; not part of identity
    phase: int = field(default=0, compare=False)

    @property
    def variable(self) -> str:
        return self.first.target  # type: ignore[return-value]

    @property
    def positions(self) -> tuple[int, int]:
        return self.first.pos, self.second.pos

    def __str__(self) -> str:
        return f"({self.first.short()}, {self.second.short()}) {self.category.value}"


@dataclass(frozen=True)
class HbRelation:
    n: int
    # succ[i] has bit j set iff event i+1 happens before event j+1
    succ: tuple[int, ...]

    def reaches(self, e: int, f: int) -> bool:
        """True iff the event at position ``e`` happens before the one at ``f``."""
        return bool(self.succ[e - 1] >> (f - 1) & 1)

    def concurrent(self, e: int, f: int) -> bool:
        return e != f and not self.reaches(e, f) and not self.reaches(f, e)


def base_edges(t: Trace) -> set[tuple[int, int]]:
    """Unclosed PO/WRD/RAD/FO/JO edges as position pairs."""
    ev = t.events
    edges: set[tuple[int, int]] = set()
    last_in_thread: dict[int, int] = {}
    for e in ev:
        prev = last_in_thread.get(e.tid)
        if prev is not None:
            edges.add((prev, e.pos))
        last_in_thread[e.tid] = e.pos

    for w in ev:
        if not w.is_write:
            continue
        for f in ev[w.pos:]:
            if f.target != w.target or not f.kind.is_access:
                continue
            if f.is_write:
                break
            edges.add((w.pos, f.pos))

    for r in ev:
        if r.kind is not Kind.RELEASE:
            continue
        for a in ev[r.pos:]:
            if a.kind is Kind.ACQUIRE and a.target == r.target and a.tid != r.tid:
                edges.add((r.pos, a.pos))
                break

    for fj in ev:
        if fj.kind is Kind.FORK:
            edges.update((fj.pos, e.pos) for e in ev if e.tid == fj.target)
        elif fj.kind is Kind.JOIN:
            edges.update((e.pos, fj.pos) for e in ev if e.tid == fj.target)
    return edges


def compute_hb(t: Trace) -> HbRelation:
    n = len(t)
    rows = [0] * n
    for a, b in base_edges(t):
        rows[a - 1] |= 1 << (b - 1)
    for k in range(n):
        bit = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return HbRelation(n, tuple(rows))


def concurrent(h: HbRelation, e: Event, f: Event) -> bool:
    return h.concurrent(e.pos, f.pos)


def all_conc(t: Trace, h: HbRelation, x: str) -> set[tuple[Event, Event]]:
    """All position-ordered pairs of concurrent reads/writes on ``x``."""
    acc = t.accesses(x)
    return {
        (e, f)
        for i, e in enumerate(acc)
        for f in acc[i + 1:]
        if h.concurrent(e.pos, f.pos)
    }


def race_set(t: Trace, h: HbRelation) -> set[RacePair]:
    """Every write-write, concurrent write-read and write-read dependency race."""
    n = h.n
    pred = [0] * n
    for i, row in enumerate(h.succ):
        j = 0
        while row:
            if row & 1:
                pred[j] |= 1 << i
            row >>= 1
            j += 1

    races: set[RacePair] = set()
    for x in t.variables:
        acc = t.accesses(x)
        for i, e in enumerate(acc):
            for f in acc[i + 1:]:
                if not (e.is_write or f.is_write):
                    continue
                if h.concurrent(e.pos, f.pos):
                    races.add(RacePair(e, f, categorize(e, f)))
                elif (
                    e.is_write
                    and f.is_read
                    and e.tid != f.tid
                    and h.reaches(e.pos, f.pos)
                    and not (h.succ[e.pos - 1] & pred[f.pos - 1])
                ):
                    races.add(RacePair(e, f, Category.WRD))
    return races
