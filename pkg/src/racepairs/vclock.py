"""Vector clocks and epochs.

Clocks are immutable and indexed by a dense thread slot (see ``Trace.slots``).
Missing trailing slots read as 0, so clocks of different lengths compare and
join as if zero-extended.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from itertools import zip_longest


class VectorClock:
    __slots__ = ("_stamps",)

    def __init__(self, stamps: Iterable[int] = ()) -> None:
        s = list(stamps)
        while s and s[-1] == 0:
            s.pop()
        self._stamps: tuple[int, ...] = tuple(s)

    @classmethod
    def initial(cls, slot: int) -> VectorClock:
        """Clock of a root thread: all zero except its own slot, which is 1."""
        return cls([0] * slot + [1])

    @property
    def stamps(self) -> tuple[int, ...]:
        return self._stamps

    def __getitem__(self, slot: int) -> int:
        s = self._stamps
        return s[slot] if slot < len(s) else 0

    def __len__(self) -> int:
        return len(self._stamps)

    def join(self, other: VectorClock) -> VectorClock:
        a, b = self._stamps, other._stamps
        if len(a) < len(b):
            a, b = b, a
        if not b:
            return self if a is self._stamps else other
        out = object.__new__(VectorClock)
        out._stamps = tuple(x if x >= y else y for x, y in zip(a, b)) + a[len(b):]
        return out

    def inc(self, slot: int) -> VectorClock:
        return self.set(slot, self[slot] + 1)

    def set(self, slot: int, value: int) -> VectorClock:
        s = list(self._stamps)
        if slot >= len(s):
            s.extend([0] * (slot + 1 - len(s)))
        s[slot] = value
        return VectorClock(s)

    def __le__(self, other: VectorClock) -> bool:
        b = other._stamps
        nb = len(b)
        for i, x in enumerate(self._stamps):
            if x > (b[i] if i < nb else 0):
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorClock):
            return NotImplemented
        return self._stamps == other._stamps

    def __hash__(self) -> int:
        return hash(self._stamps)

    def padded(self, width: int) -> list[int]:
        return [x for x, _ in zip_longest(self._stamps, range(width), fillvalue=0)][:width]

    def __repr__(self) -> str:
        return f"VectorClock({list(self._stamps)})"

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self._stamps)) + "]"


def vc_join(a: VectorClock, b: VectorClock) -> VectorClock:
    """Point-wise maximum."""
    return a.join(b)


def vc_lte(a: VectorClock, b: VectorClock) -> bool:
    return a <= b


def vc_inc(v: VectorClock, slot: int) -> VectorClock:
    return v.inc(slot)


@dataclass(frozen=True, slots=True)
class Epoch:
    """``tid#stamp`` of one read/write, plus the event's trace position."""

    tid: int
    stamp: int
    pos: int
    is_write: bool

    def __str__(self) -> str:
        return f"{self.tid}#{self.stamp}"

    def __repr__(self) -> str:
        return f"{'w' if self.is_write else 'r'}{self.pos}:{self.tid}#{self.stamp}"
