"""Command-line front end.

Exit status: 0 success (races found is still success), 1 differential check
mismatch, 2 malformed or ill-formed trace, 3 bad command-line configuration.
"""

from __future__ import annotations

import argparse
import sys
import time
from collections.abc import Sequence
from dataclasses import replace
from typing import TextIO

from .check import post_process, run_check
from .lockset import LockClass, compute_locksets, summarize
from .oracle import Category, RacePair, all_conc, compute_hb, race_set
from .postprocess import AccSet, assemble_races
from .report import RaceReport, report_flags, report_pairs
from .shb import Mode, shb_run, shball_post
from .shbee import shbee_run, wrd_races
from .trace import Trace, TraceError, parse_trace, render_trace, validate_trace
from .tracegen import DEFAULT_WEIGHTS, ConfigError, GenConfig, filter_shared, generate

EXIT_OK, EXIT_MISMATCH, EXIT_TRACE, EXIT_CONFIG = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _read_trace(path: str, repair: bool) -> Trace:
    if path == "-":
        t = parse_trace(sys.stdin)
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            t = parse_trace(fh)
    return validate_trace(t, repair=repair)


def _analyze(t: Trace, args: argparse.Namespace) -> RaceReport:
    stats: dict[str, object] = {
        "events": len(t),
        "threads": len(t.threads),
        "variables": len(t.variables),
    }
    lockset = compute_locksets(t) if (args.lockset or args.lockset_summary) else None
    t0 = time.perf_counter()
    if args.algo == "shb":
        st = shb_run(t, Mode.FLAG_WRD if args.wrd else Mode.FLAG)
        stats["phase1_s"] = round(time.perf_counter() - t0, 6)
        rep = report_flags(st, t, args.dedup)
    elif args.algo == "shball":
        st = shb_run(t, Mode.RECORD_ALL)
        t1 = time.perf_counter()
        wrd = {RacePair(t[a], t[b], Category.WRD, phase=1) for a, b in st.wrd_pairs()}
        pairs = shball_post(st, t) if args.post else set()
        stats["phase1_s"] = round(t1 - t0, 6)
        stats["phase2_s"] = round(time.perf_counter() - t1, 6)
        rep = report_pairs(pairs | wrd, lockset, args.dedup)
    else:
        st = shbee_run(t, args.optimize)
        t1 = time.perf_counter()
        if args.post:
            accs = post_process(t, st)
        else:
            accs = {x: AccSet(set(c), seeds=set(c)) for x, c in st.conc.items()}
        pairs = assemble_races(t, accs, wrd_races(t, st))
        stats["phase1_s"] = round(t1 - t0, 6)
        stats["phase2_s"] = round(time.perf_counter() - t1, 6)
        rep = report_pairs(pairs, lockset, args.dedup)
    if not args.lockset:
        rep.entries = [replace(e, lockset_class=None) for e in rep.entries]
    rep.stats.update(stats)
    if args.lockset_summary and lockset is not None:
        counts = summarize(_entry_pairs(rep, t), lockset)
        for c in LockClass:
            rep.stats[c.value] = counts[c]
    return rep


def _entry_pairs(rep: RaceReport, t: Trace) -> list[RacePair]:
    return [
        RacePair(t[e.first_pos], t[e.second_pos], Category(e.category))
        for e in rep.entries
        if e.first_pos is not None
    ]


def cmd_analyze(args: argparse.Namespace, out: TextIO) -> int:
    t = _read_trace(args.trace, args.repair)
    rep = _analyze(t, args)
    out.write(rep.render_json() + "\n" if args.format == "json" else rep.render_text())
    sys.stderr.write(rep.render_stats())
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, out: TextIO) -> int:
    t = _read_trace(args.trace, args.repair)
    h = compute_hb(t)
    races = sorted(race_set(t, h), key=lambda r: (r.first.pos, r.second.pos))
    for r in races:
        out.write(
            f"{r.variable} {r.first.location}@{r.first.pos} <-> "
            f"{r.second.location}@{r.second.pos} [{r.category.value}]\n"
        )
    for x in t.variables:
        pairs = sorted((e.pos, f.pos) for e, f in all_conc(t, h, x))
        out.write(f"AllConc({x}) = {{{', '.join(f'({a},{b})' for a, b in pairs)}}}\n")
    return EXIT_OK


def _weights(text: str | None) -> dict[str, float]:
    w = dict(DEFAULT_WEIGHTS)
    if not text:
        return w
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"weight {item!r} is not op=value")
        try:
            w[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"weight {item!r} is not a number") from None
    return w


def cmd_gen(args: argparse.Namespace, out: TextIO) -> int:
    cfg = GenConfig(
        seed=args.seed,
        threads=args.threads,
        variables=args.variables,
        mutexes=args.mutexes,
        events=args.events,
        weights=_weights(args.weights),
        fork_join=args.fork_join,
        unwritten_read_weight=args.unwritten_read_weight,
    )
    text = render_trace(generate(cfg))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_filter(args: argparse.Namespace, out: TextIO) -> int:
    t = _read_trace(args.input, repair=False)
    text = render_trace(filter_shared(t))
    if args.output == "-":
        out.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, out: TextIO) -> int:
    res = run_check(
        args.seeds,
        max_events=args.max_events,
        max_threads=args.max_threads,
        max_vars=args.max_vars,
        max_mutexes=args.max_mutexes,
    )
    if res.ok:
        out.write(f"ok: {res.checked} traces\n")
        return EXIT_OK
    out.write(f"mismatch at seed {res.failed_seed}\n")
    for p in res.problems:
        out.write(f"  {p}\n")
    if res.minimal is not None:
        out.write("minimal failing trace:\n")
        out.write(render_trace(res.minimal))
    return EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="racepairs", description="Predict all data-race pairs of a recorded trace.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="report races of a trace")
    a.add_argument("--trace", required=True, help="CSV trace file, or - for stdin")
    a.add_argument("--algo", choices=["shb", "shbee", "shball"], default="shbee")
    a.add_argument("--optimize", action="store_true", help="skip read-read pairs in the linear phase")
    a.add_argument("--post", action=argparse.BooleanOptionalAction, default=True,
                   help="run post-processing (default on)")
    a.add_argument("--wrd", action="store_true", help="shb: name the partner of dependency races")
    a.add_argument("--lockset", action="store_true", help="add a lockset class to each pair")
    a.add_argument("--lockset-summary", action="store_true", help="print lockset class counts")
    a.add_argument("--format", choices=["text", "json"], default="text")
    a.add_argument("--repair", action="store_true", help="release mutexes still held at trace end")
    a.add_argument("--dedup", choices=["locations", "events"], default="locations")
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("oracle", help="brute-force race set and concurrent pairs")
    o.add_argument("--trace", required=True)
    o.add_argument("--repair", action="store_true")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("check", help="compare all engines with the oracle on generated traces")
    c.add_argument("--seeds", type=int, default=1000)
    c.add_argument("--max-events", type=int, default=20)
    c.add_argument("--max-threads", type=int, default=4)
    c.add_argument("--max-vars", type=int, default=2)
    c.add_argument("--max-mutexes", type=int, default=2)
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate a random well-formed trace")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=2)
    g.add_argument("--variables", type=int, default=1)
    g.add_argument("--mutexes", type=int, default=1)
    g.add_argument("--events", type=int, default=10)
    g.add_argument("--weights", help="op weights, e.g. rd=4,wr=4,acq=1,rel=1,fork=1,join=1")
    g.add_argument("--fork-join", action="store_true")
    g.add_argument("--unwritten-read-weight", type=float, default=1.0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("filter", help="keep only accesses to shared variables")
    f.add_argument("input")
    f.add_argument("output", nargs="?", default="-")
    f.set_defaults(func=cmd_filter)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except TraceError as exc:
        sys.stderr.write(f"racepairs: {exc}\n")
        return EXIT_TRACE
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"racepairs: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
