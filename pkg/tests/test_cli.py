from __future__ import annotations

import io
import json

import pytest

from racepairs.check import check_trace, run_check, shrink
from racepairs.cli import main
from racepairs.shbee import shbee_run
from racepairs.trace import parse_trace, render_trace

from goldens import INTRO, INTRO_FIXED, T_B, WRD_FOUR


@pytest.fixture
def write(tmp_path):
    def _write(trace_or_text, name="t.csv"):
        p = tmp_path / name
        text = trace_or_text if isinstance(trace_or_text, str) else render_trace(trace_or_text)
        p.write_text(text)
        return str(p)

    return _write


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_analyze_intro(write, capsys):
    code, out = run("analyze", "--algo", "shbee", "--post", "--trace", write(INTRO))
    assert code == 0
    assert out.splitlines() == [
        "x E1@1 <-> E4@4 [WW/-/2]",
        "x E2@2 <-> E4@4 [WW/-/1]",
    ]
    assert "races: 1+1" in capsys.readouterr().err


def test_analyze_no_post_and_optimize(write):
    _, out = run("analyze", "--no-post", "--trace", write(INTRO))
    assert out.splitlines() == ["x E2@2 <-> E4@4 [WW/-/1]"]
    _, opt = run("analyze", "--optimize", "--dedup", "events", "--trace", write(T_B))
    _, plain = run("analyze", "--dedup", "events", "--trace", write(T_B))
    # phase labels differ: the optimized linear phase finds more pairs itself
    strip = lambda s: sorted(line.rsplit("/", 1)[0] for line in s.splitlines())
    assert strip(opt) == strip(plain) and len(plain.splitlines()) == 5


def test_analyze_lockset(write, capsys):
    _, out = run("analyze", "--lockset", "--lockset-summary", "--trace", write(INTRO))
    assert "x E2@2 <-> E4@4 [WW/C1/1]" in out
    err = capsys.readouterr().err
    assert "C1: 2" in err and "unprotected-both: 0" in err


def test_analyze_shb_flags(write):
    code, out = run("analyze", "--algo", "shb", "--trace", write(T_B))
    assert code == 0
    assert [line.split()[3] for line in out.splitlines()] == ["3@3", "4@4", "5@5"]
    _, wrd = run("analyze", "--algo", "shb", "--wrd", "--trace", write(WRD_FOUR))
    assert "x 2@2 <-> 4@4 [WRD/-/1]" in wrd


def test_analyze_shball(write):
    _, out = run("analyze", "--algo", "shball", "--dedup", "events", "--trace", write(T_B))
    _, ee = run("analyze", "--algo", "shbee", "--dedup", "events", "--trace", write(T_B))
    strip = lambda s: sorted(line.rsplit("/", 1)[0] for line in s.splitlines())
    assert strip(out) == strip(ee)


def test_json_schema(write):
    _, out = run("analyze", "--format", "json", "--lockset", "--trace", write(INTRO))
    rows = json.loads(out)
    assert [r["phase"] for r in rows] == [2, 1]
    assert set(rows[0]) == {
        "first_loc", "second_loc", "first_pos", "second_pos",
        "variable", "category", "phase", "lockset_class",
    }


def test_empty_trace(write):
    code, out = run("analyze", "--trace", write(""))
    assert (code, out) == (0, "")
    code, out = run("oracle", "--trace", write(""))
    assert (code, out) == (0, "")


def test_location_dedup_merges_repeats(write):
    text = "1,wr,x,A\n2,wr,x,B\n1,wr,x,A\n2,wr,x,B\n"
    _, loc = run("analyze", "--trace", write(text))
    _, ev = run("analyze", "--dedup", "events", "--trace", write(text))
    assert len(loc.splitlines()) < len(ev.splitlines())
    pairs = lambda s: {tuple(sorted((l.split()[1].split("@")[0], l.split()[3].split("@")[0]))) for l in s.splitlines()}
    assert pairs(loc) == pairs(ev)


def test_bad_trace_exit_2(write, capsys):
    assert run("analyze", "--trace", write("1,frob,x\n"))[0] == 2
    assert "line 1" in capsys.readouterr().err
    assert run("analyze", "--trace", write("1,acq,y\n2,acq,y\n"))[0] == 2
    assert "position 2" in capsys.readouterr().err


def test_repair_flag(write):
    path = write("1,acq,y\n1,wr,x\n2,wr,x\n")
    assert run("analyze", "--trace", path)[0] == 2
    assert run("analyze", "--repair", "--trace", path)[0] == 0


def test_config_errors_exit_3(write):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--algo", "nope", "--trace", "x"])
    assert exc.value.code == 3
    assert run("analyze", "--trace", "/nonexistent/t.csv")[0] == 3
    assert run("gen", "--threads", "1", "--fork-join")[0] == 3
    assert run("gen", "--weights", "rd=abc")[0] == 3


def test_oracle_command(write):
    _, out = run("oracle", "--trace", write(INTRO))
    assert out.splitlines() == [
        "x E1@1 <-> E4@4 [WW]",
        "x E2@2 <-> E4@4 [WW]",
        "AllConc(x) = {(1,4), (2,4)}",
    ]
    _, out = run("oracle", "--trace", write(WRD_FOUR))
    assert "x 2@2 <-> 3@3" not in out
    assert "x 2@2 <-> 4@4 [WRD]" in out
    _, out = run("oracle", "--trace", write(INTRO_FIXED))
    assert out.splitlines() == ["AllConc(x) = {}"]


def test_gen_and_filter(tmp_path):
    target = tmp_path / "g.csv"
    assert run("gen", "--seed", "4", "--threads", "3", "--events", "30", "-o", str(target))[0] == 0
    _, again = run("gen", "--seed", "4", "--threads", "3", "--events", "30")
    assert target.read_text() == again
    filtered = tmp_path / "f.csv"
    assert run("filter", str(target), str(filtered))[0] == 0
    assert len(parse_trace(filtered.read_text())) <= 30
    code, out = run("filter", str(target))
    assert code == 0 and out == filtered.read_text()


def test_check_command():
    assert run("check", "--seeds", "0") == (0, "ok: 0 traces\n")
    code, out = run("check", "--seeds", "200", "--max-events", "12")
    assert code == 0 and out == "ok: 200 traces\n"


def broken_shbee(t, optimized=False, observer=None):
    """Forgets every edge constraint."""
    st = shbee_run(t, optimized, observer)
    st.edges.clear()
    return st


def test_check_detects_broken_engine():
    res = run_check(500, max_events=12, shbee=broken_shbee)
    assert not res.ok and res.failed_seed is not None
    assert res.minimal is not None
    assert check_trace(res.minimal, broken_shbee)
    assert len(res.minimal) <= 4


def test_shrink_keeps_failure():
    t = parse_trace("1,wr,x\n1,acq,m\n1,rel,m\n2,rd,y\n1,wr,x\n2,wr,x\n")
    small = shrink(t, lambda c: len(c.accesses("x")) >= 2)
    assert len(small) == 2
