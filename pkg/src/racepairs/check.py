"""Differential checking of every engine against the brute-force oracle.

``check_trace`` returns a list of human-readable problems (empty when all
engines agree with the oracle and every internal invariant holds).
``run_check`` drives it over generated traces and shrinks the first failure.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from itertools import combinations

from .lockset import LockClass, compute_locksets, summarize
from .oracle import Category, HbRelation, RacePair, all_conc, compute_hb, race_set
from .postprocess import AccSet, assemble_races, eliminate, expand, stamp_order
from .shb import Mode, shb_run, shball_post
from .shbee import ShbeeState, shbee_run, wrd_races
from .trace import Trace, TraceError, validate_trace
from .tracegen import GenConfig, generate
from .vclock import Epoch

ShbeeRunner = Callable[..., ShbeeState]


def post_process(t: Trace, st: ShbeeState, prune: bool = True) -> dict[str, AccSet]:
    """Expand and eliminate per variable; ``prune`` stops at ordered candidates."""
    ordered = stamp_order(st.evt, t.slots) if prune else None
    return {
        x: eliminate(expand(st.conc.get(x, ()), st.edges.get(x, {}), ordered), st.evt, t.slots)
        for x in t.variables
    }


def predict_all(t: Trace, optimized: bool = False) -> set[RacePair]:
    """Every race pair of ``t``: both phases of the epoch/edge analysis."""
    st = shbee_run(t, optimized)
    return assemble_races(t, post_process(t, st), wrd_races(t, st))


def _positions(pairs) -> set[tuple[int, int]]:
    return {(a.pos, b.pos) for a, b in pairs}


class _RwWatcher:
    """Observer asserting the per-step bounds and concurrency of ``RW(x)``."""

    def __init__(self, h: HbRelation, k: int, optimized: bool) -> None:
        self.h, self.k, self.optimized = h, k, optimized
        self.problems: list[str] = []

    def __call__(self, st: ShbeeState, x: str, eps: Epoch) -> None:
        rw = st.rw[x]
        bound = 2 * self.k if self.optimized else self.k
        if len(rw) > bound:
            self.problems.append(f"|RW({x})|={len(rw)} > {bound} after position {eps.pos}")
        for a, b in combinations(rw, 2):
            if self.optimized and a.is_write != b.is_write:
                continue
            if not self.h.concurrent(a.pos, b.pos):
                self.problems.append(f"RW({x}) holds ordered {a!r}, {b!r} after position {eps.pos}")


def check_trace(t: Trace, shbee: ShbeeRunner = shbee_run) -> list[str]:
    problems: list[str] = []
    h = compute_hb(t)
    races = race_set(t, h)
    conc_races = {r for r in races if r.category.concurrent}
    k = max(1, len(t.threads))
    n = len(t)

    results: dict[bool, set[RacePair]] = {}
    for optimized in (False, True):
        tag = "optimized" if optimized else "unoptimized"
        watch = _RwWatcher(h, k, optimized)
        st = shbee(t, optimized, observer=watch)
        problems += [f"{tag}: {p}" for p in watch.problems]

        for x in t.variables:
            for a, b in st.edge_pairs(x):
                if not h.reaches(a.pos, b.pos):
                    problems.append(f"{tag}: edge {a!r} -> {b!r} on {x} is not happens-before")
            for a, b in st.conc.get(x, ()):
                if a.pos >= b.pos or not h.concurrent(a.pos, b.pos):
                    problems.append(f"{tag}: Conc({x}) holds non-concurrent {a!r}, {b!r}")
                if optimized and not (a.is_write or b.is_write):
                    problems.append(f"{tag}: Conc({x}) holds read-read {a!r}, {b!r}")

        accs = post_process(t, st)
        literal = post_process(t, st, prune=False)
        for x, acc in literal.items():
            if acc.pairs != accs[x].pairs:
                problems.append(f"{tag}: pruned and literal expansion disagree on {x}")
            if acc.enqueued > n * n:
                problems.append(f"{tag}: {acc.enqueued} pairs enqueued for {x}, above n^2")
        if not optimized:
            for x in t.variables:
                truth = all_conc(t, h, x)
                got = accs[x].positions()
                want = {(e.pos, f.pos) for e, f in truth}
                if got != want:
                    problems.append(f"AllConc({x}) mismatch: extra {sorted(got - want)} missing {sorted(want - got)}")
                conc = _positions(st.conc.get(x, ()))
                for e, f in truth:
                    between = any(
                        e.pos < g.pos < f.pos and h.concurrent(g.pos, f.pos)
                        for g in t.accesses(x)
                    )
                    if not between and (e.pos, f.pos) not in conc:
                        problems.append(f"Conc({x}) misses adjacent concurrent pair ({e.pos}, {f.pos})")

        got = assemble_races(t, accs, wrd_races(t, st))
        results[optimized] = got
        if got != races:
            problems.append(f"{tag} races mismatch: extra {_fmt(got - races)} missing {_fmt(races - got)}")

    if results[False] != results[True]:
        problems.append("optimized and unoptimized race sets differ")

    shb = shb_run(t, Mode.RECORD_ALL)
    got = shball_post(shb, t)
    if got != conc_races:
        problems.append(f"SHB-all mismatch: extra {_fmt(got - conc_races)} missing {_fmt(conc_races - got)}")

    # the read check runs before the last-write join, so dependency reads
    # are flagged in plain mode too; flag+wrd mode also names the partner
    wrd_truth = {(r.first.pos, r.second.pos) for r in races if r.category is Category.WRD}
    want_flags = {r.second.pos for r in conc_races} | {b for _, b in wrd_truth}
    plain = shb_run(t, Mode.FLAG)
    if set(plain.flags) != want_flags:
        problems.append(f"SHB flags {sorted(plain.flags)} != expected {sorted(want_flags)}")
    with_wrd = shb_run(t, Mode.FLAG_WRD)
    if set(with_wrd.flags) != want_flags:
        problems.append(f"SHB+WRD flags {sorted(with_wrd.flags)} != expected {sorted(want_flags)}")
    if set(with_wrd.wrd_pairs()) != wrd_truth:
        problems.append(f"SHB WRD pairs {sorted(with_wrd.wrd_pairs())} != {sorted(wrd_truth)}")

    try:
        counts = summarize(races, compute_locksets(t))
        if sum(counts.values()) != len(races) or set(counts) != set(LockClass):
            problems.append("lockset classes do not partition the race set")
    except RuntimeError as exc:
        problems.append(str(exc))
    return problems


def _fmt(pairs: set[RacePair]) -> str:
    return "{" + ", ".join(sorted(str(p) for p in pairs)) + "}"


def corpus_config(seed: int, max_events: int = 20, max_threads: int = 4,
                  max_vars: int = 2, max_mutexes: int = 2) -> GenConfig:
    """Generator settings for one corpus seed; fork/join on odd seeds."""
    rng = random.Random(seed)
    fork_join = seed % 2 == 1 and max_threads >= 2
    threads = rng.randint(2 if fork_join else 1, max_threads)
    return GenConfig(
        seed=seed,
        threads=threads,
        variables=rng.randint(1, max_vars),
        mutexes=rng.randint(0, max_mutexes),
        events=rng.randint(1, max_events),
        fork_join=fork_join,
    )


def corpus(seeds: int, **kw) -> Iterator[Trace]:
    for s in range(seeds):
        yield generate(corpus_config(s, **kw))


def shrink(t: Trace, failing: Callable[[Trace], bool]) -> Trace:
    """Greedily drop events while the trace stays well-formed and failing.

    Single events are tried first, then pairs (an acquire and its release,
    or a fork and its join, can only go together).
    """
    rows = [(e.tid, e.kind, e.target, e.loc) for e in t.events]

    def attempt(drop: tuple[int, ...]) -> bool:
        nonlocal rows
        cand_rows = [r for i, r in enumerate(rows) if i not in drop]
        cand = Trace.from_rows(cand_rows)
        try:
            validate_trace(cand)
        except TraceError:
            return False
        if failing(cand):
            rows = cand_rows
            return True
        return False

    changed = True
    while changed:
        n = len(rows)
        changed = any(attempt((i,)) for i in range(n)) or any(
            attempt((i, j)) for i in range(n) for j in range(i + 1, n)
        )
    return Trace.from_rows(rows)


@dataclass
class CheckOutcome:
    checked: int = 0
    failed_seed: int | None = None
    problems: list[str] = field(default_factory=list)
    minimal: Trace | None = None

    @property
    def ok(self) -> bool:
        return self.failed_seed is None


def run_check(seeds: int, max_events: int = 20, shbee: ShbeeRunner = shbee_run, **kw) -> CheckOutcome:
    out = CheckOutcome()
    for s in range(seeds):
        t = generate(corpus_config(s, max_events=max_events, **kw))
        problems = check_trace(t, shbee)
        out.checked += 1
        if problems:
            out.failed_seed = s
            out.problems = problems
            out.minimal = shrink(t, lambda c: bool(check_trace(c, shbee)))
            break
    return out
