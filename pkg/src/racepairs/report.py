"""Race reports: deduplication, text and JSON rendering."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field

from .lockset import LocksetRecord, classify
from .oracle import RacePair
from .shb import ShbState
from .trace import Trace


@dataclass(frozen=True, slots=True)
class ReportEntry:
    first_loc: str | None
    second_loc: str
    first_pos: int | None
    second_pos: int
    variable: str
    category: str
    phase: int
    lockset_class: str | None = None

    def key(self, dedup: str) -> tuple:
        if dedup == "events":
            return (self.first_pos, self.second_pos, self.variable, self.category)
        locs = tuple(sorted((self.first_loc or "", self.second_loc)))
        return (locs, self.variable, self.category)

    def text(self) -> str:
        first = "-" if self.first_pos is None else f"{self.first_loc}@{self.first_pos}"
        tags = "/".join([self.category, self.lockset_class or "-", str(self.phase)])
        return f"{self.variable} {first} <-> {self.second_loc}@{self.second_pos} [{tags}]"


@dataclass
class RaceReport:
    entries: list[ReportEntry] = field(default_factory=list)
    stats: dict[str, object] = field(default_factory=dict)

    def phase_counts(self) -> tuple[int, int]:
        p1 = sum(1 for e in self.entries if e.phase == 1)
        return p1, len(self.entries) - p1

    def render_text(self) -> str:
        return "".join(e.text() + "\n" for e in self.entries)

    def render_json(self) -> str:
        return json.dumps([asdict(e) for e in self.entries], indent=2)

    def render_stats(self) -> str:
        p1, p2 = self.phase_counts()
        lines = [f"races: {p1}+{p2}"]
        lines += [f"{k}: {v}" for k, v in self.stats.items()]
        return "\n".join(lines) + "\n"


def _dedup(entries: Iterable[ReportEntry], dedup: str) -> list[ReportEntry]:
    if dedup not in ("locations", "events"):
        raise ValueError(f"unknown dedup mode {dedup!r}")
    # phase-1 entries first so a location pair is credited to the earliest phase
    ordered = sorted(entries, key=lambda e: (e.phase, e.second_pos, e.first_pos or 0, e.category))
    seen: set[tuple] = set()
    out = []
    for e in ordered:
        k = e.key(dedup)
        if k not in seen:
            seen.add(k)
            out.append(e)
    out.sort(key=lambda e: (e.second_pos, e.first_pos or 0, e.category))
    return out


def report_pairs(
    pairs: Iterable[RacePair],
    lockset: LocksetRecord | None = None,
    dedup: str = "locations",
) -> RaceReport:
    entries = []
    for p in pairs:
        cls = classify(p, lockset).value if lockset is not None else None
        entries.append(
            ReportEntry(
                p.first.location,
                p.second.location,
                p.first.pos,
                p.second.pos,
                p.variable,
                p.category.value,
                p.phase or 1,
                cls,
            )
        )
    return RaceReport(_dedup(entries, dedup))


def report_flags(state: ShbState, t: Trace, dedup: str = "locations") -> RaceReport:
    """Flagged events have no named partner, except for WRD flags."""
    entries = []
    for f in state.flags.values():
        e = t[f.pos]
        if f.category:
            entries.append(ReportEntry(None, e.location, None, e.pos, e.target, f.category, 1))  # type: ignore[arg-type]
        if f.wrd_partner is not None:
            w = t[f.wrd_partner]
            entries.append(ReportEntry(w.location, e.location, w.pos, e.pos, e.target, "WRD", 1))  # type: ignore[arg-type]
    return RaceReport(_dedup(entries, dedup))
