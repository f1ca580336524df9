"""SHB race flagging and its all-pairs variant.

``shb_run`` streams a trace once and flags events that race with some earlier
access. In ``flag+wrd`` mode it also names the partner of every cross-thread
write-read dependency race. ``record_all`` additionally keeps every access's
clock so that ``shball_post`` can search each flagged event's partners by
pairwise clock comparison (quadratic in the trace length).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .oracle import RacePair, categorize
from .trace import Kind, Trace
from .vclock import VectorClock


class Mode(enum.Enum):
    FLAG = "flag"
    FLAG_WRD = "flag+wrd"
    RECORD_ALL = "record_all"


@dataclass
class Flag:
    pos: int
    # "w": races with an earlier write; "r": with an earlier read; "rw": both
    category: str
    wrd_partner: int | None = None

    @property
    def label(self) -> str:
        return self.category + ("+wrd" if self.wrd_partner is not None else "")


@dataclass
class ShbState:
    slots: dict[int, int]
    th: dict[int, VectorClock] = field(default_factory=dict)
    writes: dict[str, VectorClock] = field(default_factory=dict)
    reads: dict[str, VectorClock] = field(default_factory=dict)
    last_write: dict[str, VectorClock] = field(default_factory=dict)
    last_write_tid: dict[str, int] = field(default_factory=dict)
    last_write_pos: dict[str, int] = field(default_factory=dict)
    rel: dict[str, VectorClock] = field(default_factory=dict)
    evt: dict[int, VectorClock] = field(default_factory=dict)
    flags: dict[int, Flag] = field(default_factory=dict)

    def clock_count(self) -> int:
        """Clocks held by the streaming state, ``evt`` excluded."""
        return (
            len(self.th) + len(self.writes) + len(self.reads)
            + len(self.last_write) + len(self.rel)
        )

    def wrd_pairs(self) -> list[tuple[int, int]]:
        return [(f.wrd_partner, f.pos) for f in self.flags.values() if f.wrd_partner is not None]


_ZERO = VectorClock()


def shb_run(t: Trace, mode: Mode | str = Mode.FLAG) -> ShbState:
    mode = Mode(mode)
    wrd = mode is not Mode.FLAG
    record = mode is Mode.RECORD_ALL
    slots = t.slots
    st = ShbState(slots=slots)
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
        if kind is Kind.WRITE:
            x = e.target
            v = clock(i)
            if record:
                st.evt[e.pos] = v
            tag = ""
            if not st.reads.get(x, _ZERO) <= v:
                tag += "r"
            if not st.writes.get(x, _ZERO) <= v:
                tag += "w"
            if tag:
                st.flags[e.pos] = Flag(e.pos, tag)
            st.last_write[x] = v
            st.last_write_tid[x] = i
            st.last_write_pos[x] = e.pos
            st.writes[x] = st.writes.get(x, _ZERO).set(s, v[s])
            th[i] = v.inc(s)
        elif kind is Kind.READ:
            x = e.target
            v = clock(i)
            flag = None
            if not st.writes.get(x, _ZERO) <= v:
                flag = st.flags[e.pos] = Flag(e.pos, "w")
            if wrd and x in st.last_write_tid:
                j = slots[st.last_write_tid[x]]
                if st.last_write[x][j] > v[j]:
                    if flag is None:
                        flag = st.flags[e.pos] = Flag(e.pos, "")
                    flag.wrd_partner = st.last_write_pos[x]
            v = v.join(st.last_write.get(x, _ZERO))
            if record:
                st.evt[e.pos] = v
            st.reads[x] = st.reads.get(x, _ZERO).set(s, v[s])
            th[i] = v.inc(s)
        elif kind is Kind.ACQUIRE:
            th[i] = clock(i).join(st.rel.get(e.target, _ZERO))
        elif kind is Kind.RELEASE:
            v = clock(i)
            st.rel[e.target] = v
            th[i] = v.inc(s)
        elif kind is Kind.FORK:
            v = clock(i)
            j = e.target
            th[j] = v.set(slots[j], 1)
            th[i] = v.inc(s)
        elif kind is Kind.JOIN:
            th[i] = clock(i).join(clock(e.target))
    return st


def shball_post(state: ShbState, t: Trace) -> set[RacePair]:
    """All concurrent race pairs whose later event was flagged.

    For each flagged access ``f`` every earlier access ``e`` on the same
    variable (one of the two a write) is a partner iff ``e``'s recorded clock
    is not below ``f``'s.
    """
    evt = state.evt
    earlier: dict[str, list] = {}
    out: set[RacePair] = set()
    for f in t.events:
        if not f.kind.is_access:
            continue
        seen = earlier.setdefault(f.target, [])  # type: ignore[arg-type]
        if f.pos in state.flags:
            try:
                vf = evt[f.pos]
            except KeyError:
                raise RuntimeError(f"no recorded clock for {f}; run shb_run in record_all mode") from None
            for e in seen:
                if not (e.is_write or f.is_write):
                    continue
                if not evt[e.pos] <= vf:
                    out.add(RacePair(e, f, categorize(e, f), phase=2))
        seen.append(f)
    return out
