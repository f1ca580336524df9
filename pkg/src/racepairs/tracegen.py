"""Seeded random traces, the shared-variable filter and a synthetic benchmark trace."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .trace import Event, Kind, Trace


class ConfigError(ValueError):
    pass


DEFAULT_WEIGHTS = {"rd": 4.0, "wr": 4.0, "acq": 1.0, "rel": 1.0, "fork": 1.0, "join": 1.0}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    threads: int = 2
    variables: int = 1
    mutexes: int = 1
    events: int = 10
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    fork_join: bool = False
    # relative weight of reading a variable nobody has written yet; 0 forbids it
    unwritten_read_weight: float = 1.0

    def check(self) -> None:
        if self.threads < 1 or self.variables < 1 or self.events < 1:
            raise ConfigError("threads, variables and events must be positive")
        if self.mutexes < 0:
            raise ConfigError("mutexes must be non-negative")
        unknown = set(self.weights) - set(DEFAULT_WEIGHTS)
        if unknown:
            raise ConfigError(f"unknown op weights: {sorted(unknown)}")
        if any(w < 0 for w in self.weights.values()):
            raise ConfigError("op weights must be non-negative")
        if not any(self.weights.get(k, 0) > 0 for k in ("rd", "wr", "acq")):
            raise ConfigError("at least one of rd, wr, acq needs positive weight")
        if self.unwritten_read_weight < 0:
            raise ConfigError("unwritten_read_weight must be non-negative")
        if self.fork_join and self.threads < 2:
            raise ConfigError("fork/join needs at least 2 threads")


def generate(cfg: GenConfig) -> Trace:
    """A well-formed random trace of at most ``cfg.events`` events.

    Thread ids are ``1..threads``. Without fork/join every thread is a root;
    with it only thread 1 is, and the others must be forked before they run.
    The trace ends early only if no thread has any enabled action.
    """
    cfg.check()
    rng = random.Random(cfg.seed)
    w = {k: cfg.weights.get(k, 0.0) for k in DEFAULT_WEIGHTS}
    tids = list(range(1, cfg.threads + 1))
    variables = [f"x{i}" for i in range(cfg.variables)] if cfg.variables > 1 else ["x"]
    mutexes = [f"m{i}" for i in range(cfg.mutexes)]

    live: list[int] = [1] if cfg.fork_join else list(tids)
    unforked: list[int] = tids[1:] if cfg.fork_join else []
    children: dict[int, list[int]] = {t: [] for t in tids}
    held: dict[int, list[str]] = {t: [] for t in tids}
    owner: dict[str, int] = {}
    written: set[str] = set()
    rows: list[tuple[int, str, object]] = []

    def actions(t: int) -> list[tuple[float, str, object]]:
        out: list[tuple[float, str, object]] = []
        if w["wr"]:
            out += [(w["wr"] / len(variables), "wr", x) for x in variables]
        if w["rd"]:
            for x in variables:
                scale = 1.0 if x in written else cfg.unwritten_read_weight
                if scale:
                    out.append((w["rd"] * scale / len(variables), "rd", x))
        free = [m for m in mutexes if m not in owner]
        if w["acq"] and free and budget_left() > total_held() + 1:
            out += [(w["acq"] / len(free), "acq", m) for m in free]
        if w["rel"] and held[t]:
            out += [(w["rel"] / len(held[t]), "rel", m) for m in held[t]]
        if w["fork"] and unforked:
            out.append((w["fork"], "fork", unforked[0]))
        if w["join"]:
            ready = [c for c in children[t] if c in live and not held[c]]
            out += [(w["join"] / len(ready), "join", c) for c in ready]
        return out

    def total_held() -> int:
        return sum(len(h) for h in held.values())

    def budget_left() -> int:
        return cfg.events - len(rows)

    while budget_left() > 0:
        if budget_left() <= total_held():
            # close every critical section before the budget runs out
            t = min(h for h in held if held[h])
            rows.append((t, "rel", held[t].pop()))
            del owner[rows[-1][2]]  # type: ignore[arg-type]
            continue
        options = [(t, acts) for t in live if (acts := actions(t))]
        if not options:
            break
        t, acts = options[rng.randrange(len(options))]
        _, op, target = rng.choices(acts, weights=[a[0] for a in acts])[0]
        rows.append((t, op, target))
        if op == "wr":
            written.add(target)  # type: ignore[arg-type]
        elif op == "acq":
            owner[target] = t  # type: ignore[index]
            held[t].append(target)  # type: ignore[arg-type]
        elif op == "rel":
            del owner[target]  # type: ignore[arg-type]
            held[t].remove(target)  # type: ignore[arg-type]
        elif op == "fork":
            unforked.remove(target)  # type: ignore[arg-type]
            live.append(target)  # type: ignore[arg-type]
            children[t].append(target)  # type: ignore[arg-type]
        elif op == "join":
            live.remove(target)  # type: ignore[arg-type]
    return Trace.from_rows(rows)


def filter_shared(t: Trace) -> Trace:
    """Drop accesses to variables while only one thread has touched them.

    The single most recent access of the first thread survives once another
    thread touches the variable; later accesses all survive. Synchronization
    events always pass. Kept events stay in trace order and are renumbered;
    each one's ``loc`` records its original location.
    """
    owner: dict[str, int] = {}
    shared: set[str] = set()
    pending: dict[str, int] = {}
    keep: set[int] = set()
    for e in t.events:
        if not e.kind.is_access:
            keep.add(e.pos)
            continue
        x: str = e.target  # type: ignore[assignment]
        if x in shared:
            keep.add(e.pos)
        elif owner.setdefault(x, e.tid) == e.tid:
            pending[x] = e.pos
        else:
            shared.add(x)
            keep.add(pending.pop(x))
            keep.add(e.pos)
    kept = [e for e in t.events if e.pos in keep]
    return Trace(
        tuple(Event(i, e.tid, e.kind, e.target, e.location) for i, e in enumerate(kept, start=1))
    )


def ring_trace(n_events: int, threads: int = 8, variables: int = 4, block: int = 64) -> Trace:
    """Deterministic benchmark trace with a bounded number of races per access.

    Step ``i`` runs on thread ``i mod threads``: it synchronizes with the
    threads a few steps back through a small pool of mutexes, writes one
    variable, then publishes via another mutex. Each write is concurrent with
    only its immediate neighbours, so phase-1 work per event stays constant.
    Variables rotate in blocks of ``block`` steps.
    """
    pool = max(1, threads // 2)
    rows: list[tuple[int, str, str]] = []
    step = 0
    while len(rows) < n_events:
        tid = step % threads
        x = f"v{(step // block) % variables}"
        for m in ((step - 3) % pool, (step - 2) % pool):
            rows += [(tid, "acq", f"m{m}"), (tid, "rel", f"m{m}")]
        rows.append((tid, "wr", x))
        m = step % pool
        rows += [(tid, "acq", f"m{m}"), (tid, "rel", f"m{m}")]
        step += 1
    # trim without splitting a critical section
    rows = rows[:n_events]
    if rows and rows[-1][1] == "acq":
        rows[-1] = (rows[-1][0], "wr", "v0")
    return Trace.from_rows(rows)
