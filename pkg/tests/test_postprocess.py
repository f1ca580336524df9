from __future__ import annotations

import pytest

from racepairs.check import post_process, predict_all
from racepairs.oracle import Category, compute_hb, race_set
from racepairs.postprocess import AccSet, assemble_races, count_by_phase, eliminate, expand
from racepairs.shbee import shbee_run, wrd_races
from racepairs.trace import Trace
from racepairs.tracegen import GenConfig, generate

from goldens import INTRO, LOCK_CHAIN, T_A, T_B, pos_pairs, race_keys


def expanded(t: Trace, optimized: bool = False, x: str = "x") -> AccSet:
    st = shbee_run(t, optimized)
    return expand(st.conc.get(x, ()), st.edges.get(x, {}))


def test_ta_expansion_recovers_w1_w3():
    acc = expanded(T_A)
    assert acc.positions() == {(2, 3), (1, 3)}
    assert {(str(a), str(b)) for a, b in acc.pairs} == {("1#2", "2#1"), ("1#1", "2#1")}


def test_tb_unoptimized_expansion():
    acc = expanded(T_B)
    conc = {(2, 3), (2, 4), (2, 5), (4, 5)}
    assert acc.positions() == conc | {(1, 3), (1, 4), (1, 5), (3, 5)}


def test_tb_optimized_is_fixpoint():
    st = shbee_run(T_B, optimized=True)
    acc = expand(st.conc["x"], st.edges["x"])
    assert acc.positions() == pos_pairs(st.conc["x"])


def test_tb_elimination_drops_only_the_dependency_pair():
    st = shbee_run(T_B)
    acc = expand(st.conc["x"], st.edges["x"])
    kept = eliminate(acc, st.evt, T_B.slots)
    # w3 -> r5 is a write-read dependency; r5's clock [0,1,1] covers w3's stamp 1
    assert acc.positions() - kept.positions() == {(3, 5)}


def test_lock_chain_elimination():
    st = shbee_run(LOCK_CHAIN)
    acc = expand(st.conc["x"], st.edges["x"])
    assert {(str(a), str(b)) for a, b in acc.pairs} == {("2#2", "3#2"), ("1#1", "3#2")}
    kept = eliminate(acc, st.evt, LOCK_CHAIN.slots)
    assert {(str(a), str(b)) for a, b in kept.pairs} == {("2#2", "3#2")}


def test_elimination_missing_clock_is_internal_error():
    st = shbee_run(T_A)
    acc = expand(st.conc["x"], st.edges["x"])
    with pytest.raises(RuntimeError):
        eliminate(acc, {}, T_A.slots)


def test_worklist_never_revisits():
    t = generate(GenConfig(seed=3, threads=4, variables=1, mutexes=1, events=200))
    st = shbee_run(t)
    acc = expand(st.conc["x"], st.edges["x"])
    assert acc.enqueued == len(acc.seen) == len(acc.pairs)
    assert acc.enqueued <= len(t) ** 2


def test_assemble_tb():
    races = predict_all(T_B)
    assert race_keys(races) == {
        (1, 3, "WW"), (2, 3, "RW"), (1, 4, "WR"), (1, 5, "WR"), (3, 5, "WRD"),
    }
    assert predict_all(T_B, optimized=True) == races


def test_assemble_intro_phases():
    races = predict_all(INTRO)
    assert {(r.first.location, r.second.location, r.phase) for r in races} == {
        ("E2", "E4", 1), ("E1", "E4", 2),
    }
    assert count_by_phase(races) == (1, 1)


def test_all_reads_no_races():
    t = Trace.of((1, "rd", "x"), (2, "rd", "x"), (3, "rd", "x"))
    st = shbee_run(t)
    accs = post_process(t, st)
    assert accs["x"].positions() == {(1, 2), (1, 3), (2, 3)}
    assert assemble_races(t, accs, wrd_races(t, st)) == set()


def test_cross_mode_agreement_and_oracle():
    for seed in range(300):
        t = generate(GenConfig(seed=seed, threads=4, variables=2, mutexes=2, events=18, fork_join=seed % 3 == 0))
        races = race_set(t, compute_hb(t))
        assert predict_all(t) == races == predict_all(t, optimized=True), seed
        wrd = {r for r in races if r.category is Category.WRD}
        assert all(r.phase == 1 for r in predict_all(t) if r in wrd)


def test_pruned_expansion_matches_literal():
    from racepairs.postprocess import stamp_order
    from racepairs.tracegen import ring_trace

    for t in [T_A, T_B, LOCK_CHAIN, ring_trace(3000)] + [
        generate(GenConfig(seed=s, threads=4, variables=2, mutexes=2, events=40)) for s in range(100)
    ]:
        st = shbee_run(t)
        ordered = stamp_order(st.evt, t.slots)
        for x in t.variables:
            lit = expand(st.conc.get(x, ()), st.edges.get(x, {}))
            pruned = expand(st.conc.get(x, ()), st.edges.get(x, {}), ordered)
            assert pruned.pairs <= lit.pairs
            assert eliminate(pruned, st.evt, t.slots).pairs == eliminate(lit, st.evt, t.slots).pairs


def test_pruning_cuts_ring_worklist():
    from racepairs.postprocess import stamp_order
    from racepairs.tracegen import ring_trace

    t = ring_trace(5000)
    st = shbee_run(t)
    lit = expand(st.conc["v0"], st.edges["v0"])
    pruned = expand(st.conc["v0"], st.edges["v0"], stamp_order(st.evt, t.slots))
    assert pruned.enqueued * 10 < lit.enqueued
