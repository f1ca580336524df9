"""Events, traces, the CSV trace format and well-formedness checks.

A trace file has one event per line::

    tid,op,target[,loc]

where ``op`` is one of ``rd``, ``wr``, ``acq``, ``rel``, ``fork``, ``join``.
Lines starting with ``#`` and blank lines are ignored; the trace position of
an event is its index among the remaining lines, starting at 1.
"""

from __future__ import annotations

import csv
import enum
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import TextIO, Union


class Kind(enum.Enum):
    READ = "rd"
    WRITE = "wr"
    ACQUIRE = "acq"
    RELEASE = "rel"
    FORK = "fork"
    JOIN = "join"

    @property
    def is_access(self) -> bool:
        return self is Kind.READ or self is Kind.WRITE

    @property
    def is_thread_op(self) -> bool:
        return self is Kind.FORK or self is Kind.JOIN


_KINDS = {k.value: k for k in Kind}

Target = Union[str, int]


class TraceError(ValueError):
    """Base class for malformed or ill-formed traces."""


class ParseError(TraceError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(TraceError):
    def __init__(self, pos: int, message: str) -> None:
        super().__init__(f"position {pos}: {message}")
        self.pos = pos


@dataclass(frozen=True, slots=True)
class Event:
    pos: int
    tid: int
    kind: Kind
    # variable for rd/wr, mutex for acq/rel, thread id (int) for fork/join
    target: Target
    loc: str | None = None

    @property
    def location(self) -> str:
        return self.loc if self.loc is not None else str(self.pos)

    @property
    def is_read(self) -> bool:
        return self.kind is Kind.READ

    @property
    def is_write(self) -> bool:
        return self.kind is Kind.WRITE

    def short(self) -> str:
        """Compact rendering such as ``t1:wr(x)@3``."""
        return f"t{self.tid}:{self.kind.value}({self.target})@{self.pos}"

    def __str__(self) -> str:
        return self.short()


@dataclass(frozen=True)
class Trace:
    events: tuple[Event, ...] = ()

    def __post_init__(self) -> None:
        for i, e in enumerate(self.events, start=1):
            if e.pos != i:
                raise TraceError(f"event {e} sits at index {i}; positions must be 1..n")

    @classmethod
    def of(cls, *rows: Sequence) -> Trace:
        """Build a trace from ``(tid, op, target[, loc])`` rows.

        ``Trace.of((1, "wr", "x"), (2, "rd", "x"))``
        """
        return cls.from_rows(rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence]) -> Trace:
        events = []
        for pos, row in enumerate(rows, start=1):
            tid, op, target, *rest = row
            kind = op if isinstance(op, Kind) else _KINDS[op]
            if kind.is_thread_op:
                target = int(target)
            events.append(Event(pos, int(tid), kind, target, rest[0] if rest else None))
        return cls(tuple(events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, pos: int) -> Event:
        """Event at 1-based trace position ``pos``."""
        if pos < 1:
            raise IndexError(pos)
        return self.events[pos - 1]

    @cached_property
    def threads(self) -> tuple[int, ...]:
        """Thread ids in order of first appearance (as actor or fork/join target)."""
        seen: dict[int, None] = {}
        for e in self.events:
            seen.setdefault(e.tid)
            if e.kind.is_thread_op:
                seen.setdefault(e.target)  # type: ignore[arg-type]
        return tuple(seen)

    @cached_property
    def slots(self) -> dict[int, int]:
        """Dense vector-clock index for every thread id."""
        return {tid: i for i, tid in enumerate(self.threads)}

    @cached_property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(e.target for e in self.events if e.kind.is_access))  # type: ignore[misc]

    @cached_property
    def mutexes(self) -> tuple[str, ...]:
        return tuple(
            dict.fromkeys(
                e.target for e in self.events if e.kind in (Kind.ACQUIRE, Kind.RELEASE)
            )  # type: ignore[misc]
        )

    def accesses(self, variable: str | None = None) -> list[Event]:
        """Read/write events, optionally restricted to one variable."""
        return [
            e
            for e in self.events
            if e.kind.is_access and (variable is None or e.target == variable)
        ]


def project(t: Trace, tid: int) -> tuple[Event, ...]:
    """Events of thread ``tid`` in trace order."""
    return tuple(e for e in t.events if e.tid == tid)


def parse_trace(source: str | TextIO) -> Trace:
    """Parse the CSV trace format from a string or text stream."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    events: list[Event] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            fields = next(csv.reader([line]))
        except csv.Error as exc:
            raise ParseError(lineno, str(exc)) from None
        fields = [f.strip() for f in fields]
        if len(fields) not in (3, 4):
            raise ParseError(lineno, f"expected 3 or 4 fields, got {len(fields)}")
        tid_s, op, target = fields[:3]
        loc = fields[3] if len(fields) == 4 else None
        try:
            tid = int(tid_s)
        except ValueError:
            raise ParseError(lineno, f"thread id {tid_s!r} is not an integer") from None
        if tid < 0:
            raise ParseError(lineno, f"negative thread id {tid}")
        kind = _KINDS.get(op)
        if kind is None:
            raise ParseError(lineno, f"unknown op code {op!r}")
        if not target:
            raise ParseError(lineno, "empty target")
        parsed_target: Target = target
        if kind.is_thread_op:
            try:
                parsed_target = int(target)
            except ValueError:
                raise ParseError(lineno, f"{op} target {target!r} is not a thread id") from None
            if parsed_target < 0:
                raise ParseError(lineno, f"negative thread id {parsed_target}")
            if parsed_target == tid:
                raise ParseError(lineno, f"thread {tid} cannot {op} itself")
        events.append(Event(len(events) + 1, tid, kind, parsed_target, loc))
    return Trace(tuple(events))


def render_trace(t: Trace) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for e in t.events:
        row = [e.tid, e.kind.value, e.target]
        if e.loc is not None:
            row.append(e.loc)
        writer.writerow(row)
    return out.getvalue()


@dataclass
class _ThreadLife:
    first_pos: int | None = None
    forked_at: int | None = None
    joined_at: int | None = None
    held: list[str] = field(default_factory=list)


def validate_trace(t: Trace, repair: bool = False) -> Trace:
    """Check proper acquire/release and fork/join order.

    Returns ``t`` unchanged when it is well-formed. With ``repair=True`` a
    trace whose only defect is unreleased mutexes at the end is extended with
    one release per held mutex (threads in ascending id, innermost lock first).
    """
    lives: dict[int, _ThreadLife] = {}
    holder: dict[str, tuple[int, int]] = {}  # mutex -> (tid, acquire pos)

    def life(tid: int) -> _ThreadLife:
        return lives.setdefault(tid, _ThreadLife())

    for e in t.events:
        me = life(e.tid)
        if me.joined_at is not None:
            raise ValidationError(e.pos, f"thread {e.tid} already joined at position {me.joined_at}")
        if me.first_pos is None:
            me.first_pos = e.pos

        if e.kind is Kind.ACQUIRE:
            if e.target in holder:
                tid, at = holder[e.target]
                raise ValidationError(
                    e.pos, f"acquire of {e.target} while held by thread {tid} (acquired at {at})"
                )
            holder[e.target] = (e.tid, e.pos)  # type: ignore[index]
            me.held.append(e.target)  # type: ignore[arg-type]
        elif e.kind is Kind.RELEASE:
            owner = holder.get(e.target)  # type: ignore[arg-type]
            if owner is None:
                raise ValidationError(e.pos, f"release of {e.target} without matching acquire")
            if owner[0] != e.tid:
                raise ValidationError(
                    e.pos, f"release of {e.target} held by thread {owner[0]} (acquired at {owner[1]})"
                )
            del holder[e.target]  # type: ignore[arg-type]
            me.held.remove(e.target)  # type: ignore[arg-type]
        elif e.kind is Kind.FORK:
            child = life(e.target)  # type: ignore[arg-type]
            if child.forked_at is not None:
                raise ValidationError(e.pos, f"thread {e.target} already forked at {child.forked_at}")
            if child.first_pos is not None:
                raise ValidationError(
                    e.pos, f"thread {e.target} has an event at {child.first_pos} before its fork"
                )
            child.forked_at = e.pos
        elif e.kind is Kind.JOIN:
            if e.target == e.tid:
                raise ValidationError(e.pos, f"thread {e.tid} cannot join itself")
            child = life(e.target)  # type: ignore[arg-type]
            if child.joined_at is not None:
                raise ValidationError(e.pos, f"thread {e.target} already joined at {child.joined_at}")
            child.joined_at = e.pos

    if not holder:
        return t

    if not repair:
        mutex, (tid, at) = min(holder.items(), key=lambda kv: kv[1][1])
        raise ValidationError(at, f"acquire of {mutex} by thread {tid} has no matching release")

    extra: list[Event] = []
    pos = len(t.events)
    for tid in sorted(lives):
        me = lives[tid]
        if not me.held:
            continue
        if me.joined_at is not None:
            raise ValidationError(
                me.joined_at, f"thread {tid} joined while still holding {', '.join(me.held)}"
            )
        for mutex in reversed(me.held):
            pos += 1
            extra.append(Event(pos, tid, Kind.RELEASE, mutex))
    return Trace(t.events + tuple(extra))
