"""Recover every concurrent pair from the linear phase's output.

``expand`` walks the edge constraints backwards from each concurrent pair:
if ``(a, b)`` is concurrent and ``g`` immediately precedes ``a``, then
``(g, b)`` is a candidate. The result over-approximates the concurrent pairs,
and ``eliminate`` drops candidates that the recorded clocks prove ordered.
"""

from __future__ import annotations

import heapq
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

from .oracle import RacePair, categorize
from .trace import Trace
from .vclock import Epoch, VectorClock

EpochPair = tuple[Epoch, Epoch]


@dataclass
class AccSet:
    pairs: set[EpochPair] = field(default_factory=set)
    seen: set[EpochPair] = field(default_factory=set)
    # pairs that came straight from the linear phase
    seeds: set[EpochPair] = field(default_factory=set)
    enqueued: int = 0

    def positions(self) -> set[tuple[int, int]]:
        return {(a.pos, b.pos) for a, b in self.pairs}


def expand(
    conc: Iterable[EpochPair],
    edges: Mapping[Epoch, list[Epoch]],
    ordered: Callable[[Epoch, Epoch], bool] | None = None,
) -> AccSet:
    """Close ``conc`` under "predecessor of the first component".

    Pairs are processed smallest first by ``(pos(a), pos(b))``. If
    ``ordered(a, b)`` says ``a`` happens before ``b``, the pair is still
    recorded but its predecessors are not followed: they all happen before
    ``b`` as well, so elimination would drop every one of them.
    """
    acc = AccSet()
    heap: list[tuple[int, int, Epoch, Epoch]] = []

    def push(a: Epoch, b: Epoch) -> None:
        if (a, b) in acc.seen:
            return
        acc.seen.add((a, b))
        acc.enqueued += 1
        heapq.heappush(heap, (a.pos, b.pos, a, b))

    for a, b in conc:
        acc.seeds.add((a, b))
        push(a, b)
    while heap:
        _, _, a, b = heapq.heappop(heap)
        acc.pairs.add((a, b))
        if ordered is not None and ordered(a, b):
            continue
        for g in edges.get(a, ()):
            push(g, b)
    return acc


def stamp_order(evt: Mapping[int, VectorClock], slots: Mapping[int, int]) -> Callable[[Epoch, Epoch], bool]:
    """``ordered`` predicate for ``expand``: ``a``'s stamp is covered by ``b``'s clock."""

    def ordered(a: Epoch, b: Epoch) -> bool:
        try:
            v = evt[b.pos]
        except KeyError:
            raise RuntimeError(f"no recorded clock for position {b.pos}") from None
        return a.stamp <= v[slots[a.tid]]

    return ordered


def eliminate(acc: AccSet, evt: Mapping[int, VectorClock], slots: Mapping[int, int]) -> AccSet:
    """Drop pairs ``(a, b)`` where ``a``'s stamp is covered by ``b``'s clock."""
    ordered = stamp_order(evt, slots)
    kept = {(a, b) for a, b in acc.pairs if not ordered(a, b)}
    return AccSet(kept, acc.seen, acc.seeds & kept, acc.enqueued)


def assemble_races(
    t: Trace,
    acc_by_var: Mapping[str, AccSet],
    wrd: Iterable[RacePair] = (),
) -> set[RacePair]:
    """Concurrent pairs with at least one write, plus the WRD races.

    Pairs from the linear phase are labelled phase 1, the rest phase 2.
    """
    races: set[RacePair] = set(wrd)
    for acc in acc_by_var.values():
        for a, b in acc.pairs:
            if not (a.is_write or b.is_write):
                continue
            e, f = t[a.pos], t[b.pos]
            phase = 1 if (a, b) in acc.seeds else 2
            races.add(RacePair(e, f, categorize(e, f), phase=phase))
    return races


def count_by_phase(races: Iterable[RacePair]) -> tuple[int, int]:
    p1 = p2 = 0
    for r in races:
        if r.phase == 2:
            p2 += 1
        else:
            p1 += 1
    return p1, p2

