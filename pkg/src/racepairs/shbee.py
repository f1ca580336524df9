"""Linear phase of all-pairs race prediction: epochs plus edge constraints.

For every variable the pass keeps ``RW(x)``, the most recent mutually
relevant accesses as epochs. Each new access compares its thread clock with
every epoch in ``RW(x)``:

* a stamp above the clock means concurrent, so the pair goes to ``Conc(x)``
  and the epoch stays;
* otherwise the epoch happens before the access, so the immediate edge
  ``epoch -> access`` goes to ``Edge(x)`` and the epoch is superseded.

Pairs that are concurrent but hidden behind a superseded epoch are recovered
later by walking ``Edge(x)`` backwards (see ``postprocess``).

The optimized variant keeps writes in ``RW(x)`` until a later write
supersedes them, and records no read-read pairs.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

from .oracle import Category, RacePair
from .trace import Kind, Trace
from .vclock import Epoch, VectorClock

_ZERO = VectorClock()

# called after each access with (state, variable, new epoch)
Observer = Callable[["ShbeeState", str, Epoch], None]


@dataclass
class ShbeeState:
    slots: dict[int, int]
    optimized: bool = False
    th: dict[int, VectorClock] = field(default_factory=dict)
    last_write: dict[str, VectorClock] = field(default_factory=dict)
    last_write_epoch: dict[str, Epoch] = field(default_factory=dict)
    rel: dict[str, VectorClock] = field(default_factory=dict)
    evt: dict[int, VectorClock] = field(default_factory=dict)
    rw: dict[str, list[Epoch]] = field(default_factory=dict)
    conc: dict[str, list[tuple[Epoch, Epoch]]] = field(default_factory=dict)
    # edges[x][beta] = immediate predecessors of beta, in position order
    edges: dict[str, dict[Epoch, list[Epoch]]] = field(default_factory=dict)
    wrd: list[tuple[int, int]] = field(default_factory=list)

    def clock_count(self) -> int:
        """Clocks held by the streaming state, ``evt`` excluded."""
        return len(self.th) + len(self.last_write) + len(self.rel)

    def edge_pairs(self, x: str) -> set[tuple[Epoch, Epoch]]:
        return {(a, b) for b, preds in self.edges.get(x, {}).items() for a in preds}

    def conc_pairs(self, x: str) -> set[tuple[Epoch, Epoch]]:
        return set(self.conc.get(x, ()))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys([*self.rw, *self.conc]))


def shbee_run(
    t: Trace,
    optimized: bool = False,
    observer: Observer | None = None,
) -> ShbeeState:
    slots = t.slots
    st = ShbeeState(slots=slots, optimized=optimized)
    th = st.th

    def clock(tid: int) -> VectorClock:
        v = th.get(tid)
        if v is None:
            v = th[tid] = VectorClock.initial(slots[tid])
        return v

    for e in t.events:
        i = e.tid
        s = slots[i]
        kind = e.kind
        if kind.is_access:
            x: str = e.target  # type: ignore[assignment]
            v = clock(i)
            is_write = kind is Kind.WRITE
            if not is_write:
                lw = st.last_write_epoch.get(x)
                if lw is not None and lw.tid != i and lw.stamp > v[slots[lw.tid]]:
                    st.wrd.append((lw.pos, e.pos))
                v = v.join(st.last_write.get(x, _ZERO))
            st.evt[e.pos] = v
            eps = Epoch(i, v[s], e.pos, is_write)

            conc = st.conc.setdefault(x, [])
            preds: list[Epoch] = []
            keep = [eps]
            for b in st.rw.get(x, ()):
                if b.stamp > v[slots[b.tid]]:
                    if is_write or not optimized or b.is_write:
                        conc.append((b, eps))
                    keep.append(b)
                else:
                    preds.append(b)
                    if optimized and not is_write and b.is_write:
                        keep.append(b)
            if preds:
                preds.sort(key=lambda p: p.pos)
                st.edges.setdefault(x, {})[eps] = preds
            keep.sort(key=lambda p: p.pos)
            st.rw[x] = keep

            if is_write:
                st.last_write[x] = v
                st.last_write_epoch[x] = eps
            th[i] = v.inc(s)
            if observer is not None:
                observer(st, x, eps)
        elif kind is Kind.ACQUIRE:
            th[i] = clock(i).join(st.rel.get(e.target, _ZERO))  # type: ignore[arg-type]
        elif kind is Kind.RELEASE:
            v = clock(i)
            st.rel[e.target] = v  # type: ignore[index]
            th[i] = v.inc(s)
        elif kind is Kind.FORK:
            v = clock(i)
            j: int = e.target  # type: ignore[assignment]
            th[j] = v.set(slots[j], 1)
            th[i] = v.inc(s)
        elif kind is Kind.JOIN:
            th[i] = clock(i).join(clock(e.target))  # type: ignore[arg-type]
    return st


def wrd_races(t: Trace, state: ShbeeState | None = None) -> set[RacePair]:
    """Cross-thread write-read dependency races with nothing ordered in between."""
    if state is None:
        state = shbee_run(t)
    return {RacePair(t[a], t[b], Category.WRD, phase=1) for a, b in state.wrd}
