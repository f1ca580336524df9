"""Which side of a race lacks lock protection.

Each read/write is annotated with the set of mutexes its thread holds. A race
pair is then classified as

* ``C1``: the first access holds no lock, the second holds some;
* ``C2``: the reverse;
* ``C3``: both hold locks, but none in common;
* ``unprotected-both``: neither holds a lock.
"""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass

from .oracle import RacePair
from .trace import Kind, Trace


class LockClass(enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    UNPROTECTED = "unprotected-both"


@dataclass(frozen=True)
class LocksetRecord:
    # position of each read/write -> mutexes held by its thread at that point
    snapshots: dict[int, frozenset[str]]

    def of(self, pos: int) -> frozenset[str]:
        return self.snapshots[pos]


def compute_locksets(t: Trace) -> LocksetRecord:
    held: dict[int, set[str]] = {}
    snaps: dict[int, frozenset[str]] = {}
    for e in t.events:
        if e.kind is Kind.ACQUIRE:
            held.setdefault(e.tid, set()).add(e.target)  # type: ignore[arg-type]
        elif e.kind is Kind.RELEASE:
            held.get(e.tid, set()).discard(e.target)  # type: ignore[arg-type]
        elif e.kind.is_access:
            snaps[e.pos] = frozenset(held.get(e.tid, ()))
    return LocksetRecord(snaps)


def classify(pair: RacePair, ls: LocksetRecord) -> LockClass:
    a, b = ls.of(pair.first.pos), ls.of(pair.second.pos)
    if a & b:
        raise RuntimeError(f"race {pair} shares locks {sorted(a & b)}")
    if a and b:
        return LockClass.C3
    if b:
        return LockClass.C1
    if a:
        return LockClass.C2
    return LockClass.UNPROTECTED


def summarize(pairs: Iterable[RacePair], ls: LocksetRecord) -> Counter[LockClass]:
    counts: Counter[LockClass] = Counter({c: 0 for c in LockClass})
    counts.update(classify(p, ls) for p in pairs)
    return counts
