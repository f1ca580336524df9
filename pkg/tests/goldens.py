"""Small hand-written traces with known answers."""

from __future__ import annotations

from racepairs.trace import Trace, parse_trace

# two writes by thread 1, one by thread 2
T_A = Trace.of((1, "wr", "x"), (1, "wr", "x"), (2, "wr", "x"))

# write/read by thread 1, write/read by thread 2, read by thread 3
T_B = Trace.of(
    (1, "wr", "x"),
    (1, "rd", "x"),
    (2, "wr", "x"),
    (2, "rd", "x"),
    (3, "rd", "x"),
)

# the WRD race example: (w2, r4) is a dependency race, (w2, r3) is not a race
WRD_FOUR = Trace.of((1, "wr", "x"), (2, "wr", "x"), (2, "rd", "x"), (3, "rd", "x"))

# w(y) -> r(y) orders the two accesses on x
ORDERED_BY_DEP = Trace.of((1, "rd", "x"), (1, "wr", "y"), (2, "rd", "y"), (2, "wr", "x"))

INTRO = parse_trace("1,wr,x,E1\n1,wr,x,E2\n2,acq,y,E3\n2,wr,x,E4\n2,rel,y,E5\n")

INTRO_FIXED = parse_trace(
    "1,wr,x,E1\n1,acq,y,E2a\n1,wr,x,E2b\n1,rel,y,E2c\n2,acq,y,E3\n2,wr,x,E4\n2,rel,y,E5\n"
)

# three threads synchronizing through lock y; 1#1 reaches 3#2 without an edge
LOCK_CHAIN = Trace.of(
    (1, "wr", "x"),
    (1, "acq", "y"),
    (1, "rel", "y"),
    (2, "acq", "y"),
    (2, "rel", "y"),
    (2, "wr", "x"),
    (3, "acq", "y"),
    (3, "rel", "y"),
    (3, "wr", "x"),
)


def pos_pairs(pairs) -> set[tuple[int, int]]:
    return {(a.pos, b.pos) for a, b in pairs}


def race_keys(races) -> set[tuple[int, int, str]]:
    return {(r.first.pos, r.second.pos, r.category.value) for r in races}
