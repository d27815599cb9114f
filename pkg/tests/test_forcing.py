import json

import pytest

from depthlab.pi01forcing import (
    Dnc2Witness,
    ForcingError,
    Functional,
    PruningSchedule,
    force,
    is_dnc2,
    join_check,
    members_at_stage,
)
from depthlab.toyvm import ZERO, diagonal, index_to_body, phi


# ------------------------------------------------------------------ schedules

def test_members_full_space():
    sch = PruningSchedule.full_space(6)
    assert len(members_at_stage(sch, 4, 0)) == 16


def test_members_forbid_one_branch():
    sch = PruningSchedule([(0, {"1"})], 6)
    members = members_at_stage(sch, 3, 0)
    assert members == ["000", "001", "010", "011"]


def test_members_antichain_singleton():
    sch = PruningSchedule([(0, {"1", "01", "001", "0001"})], 4)
    assert members_at_stage(sch, 4, 0) == ["0000"]


def test_members_nonincreasing_in_stage():
    sch = PruningSchedule([(0, {"11"}), (5, {"10"})], 4)
    assert len(members_at_stage(sch, 3, 0)) == 6
    assert len(members_at_stage(sch, 3, 5)) == 4
    assert set(members_at_stage(sch, 3, 5)) <= set(members_at_stage(sch, 3, 0))


def test_schedule_depth_check():
    with pytest.raises(ValueError):
        PruningSchedule([(0, {"00000"})], 3)
    sch = PruningSchedule.full_space(3)
    with pytest.raises(ValueError):
        members_at_stage(sch, 4, 0)


def test_schedule_json_roundtrip(tmp_path):
    sch = PruningSchedule([(0, {"0110"}), (3, {"111"})], 6)
    doc = sch.to_json()
    again = PruningSchedule.from_json(json.loads(json.dumps(doc)))
    assert again.to_json() == doc


# ------------------------------------------------------------------ dodging witnesses

def test_is_dnc2_empty_map():
    ok, counter = is_dnc2(Dnc2Witness.frozen(1000, {}), 1000)
    assert ok and counter is None


def test_is_dnc2_canonical_witness():
    w = Dnc2Witness.from_halting_table(1000)
    for e in range(40):
        w.value(e)
    ok, _ = is_dnc2(w, 1000)
    assert ok


def test_is_dnc2_mutation_caught():
    e = 0  # the empty body halts on itself with value 0
    halts, value, _ = diagonal(e, 1000)
    assert halts
    w = Dnc2Witness.frozen(1000, {e: value % 2})
    ok, counter = is_dnc2(w, 1000)
    assert not ok and counter == e


def test_frozen_witness_raises_off_support():
    w = Dnc2Witness.frozen(100, {3: 1})
    with pytest.raises(ForcingError):
        w.value(4)


# ------------------------------------------------------------------ forcing

def full_space_instance(steps=3, depth=8, budget=4096):
    fn = Functional.projection(tuple(depth - steps + s for s in range(steps)))
    witness = Dnc2Witness.from_halting_table(budget)
    return PruningSchedule.full_space(depth), witness, fn, budget


def test_force_full_space_end_to_end():
    sch, witness, fn, budget = full_space_instance()
    res = force(sch, witness, 3, budget, functional=fn)
    assert len(res.b_prefix) == 3
    assert res.b_member.startswith(res.b_prefix)
    # every sigma bit is the witness value at the recorded probe index
    for st in res.steps:
        assert st.dodge_bit == witness.value(st.n_index)
        assert res.b_prefix[st.s] == str(st.dodge_bit)
    transcript = res.reconstruct(fn)
    assert all(t["match"] for t in transcript)


def test_force_clopen_first_branch_forced():
    sch = PruningSchedule([(0, {"0"})], 8)
    res = force(sch, Dnc2Witness.from_halting_table(4096), 1, 4096,
                functional=Functional.projection((4,)))
    st = res.steps[0]
    assert st.probe_empty_side == 0
    assert res.b_prefix == "1"
    # the probe program really returns the empty side when run diagonally
    probe = phi(st.n_index, st.n_index, ZERO, 4096, detect_cycles=True)
    assert probe.halted and probe.value == 0


def test_force_idempotent():
    sch, witness, fn, budget = full_space_instance()
    a = force(sch, Dnc2Witness.from_halting_table(budget), 3, budget, functional=fn)
    b = force(sch, Dnc2Witness.from_halting_table(budget), 3, budget, functional=fn)
    assert a.to_json() == b.to_json()


def test_force_member_at_every_stage():
    sch, witness, fn, budget = full_space_instance()
    res = force(sch, witness, 3, budget, functional=fn)
    final = res.schedule
    assert res.b_member in members_at_stage(final, final.depth, budget)
    for st in res.steps:
        assert res.b_member.startswith(st.sigma[: st.s + 1])


def test_force_probe_and_event_programs_are_self_describing():
    sch, witness, fn, budget = full_space_instance()
    res = force(sch, witness, 3, budget, functional=fn)
    for st in res.steps:
        from depthlab.toyvm import disassemble

        n_body = index_to_body(st.n_index)
        assert tuple(st.n_disassembly) == tuple(disassemble(n_body))
        diag = phi(st.n_index, st.n_index, ZERO, budget, detect_cycles=True)
        if st.probe_empty_side is None:
            assert not diag.halted
        else:
            assert diag.halted and diag.value == st.probe_empty_side
        m_diag = phi(st.m_index, st.m_index, ZERO, budget, detect_cycles=True)
        if st.event_unanimous is None:
            assert not m_diag.halted
        else:
            assert m_diag.halted and m_diag.value == st.event_unanimous


def test_force_prefix_coding_variant():
    # coding bits come from a plain prefix, dodge bits from the canonical
    # witness: the recorded coding bits are exactly the prefix bits
    sch = PruningSchedule.full_space(10)
    fn = Functional.projection((6, 7, 8, 9))
    res = force(sch, "1011", 4, 4096, functional=fn)
    assert [st.coding_bit for st in res.steps] == [1, 0, 1, 1]
    assert all(t["match"] for t in res.reconstruct(fn))


def test_force_rejects_short_prefix():
    with pytest.raises(ForcingError):
        force(PruningSchedule.full_space(8), "10", 4, 4096)


def test_force_rejects_bad_query_schedule():
    fn = Functional.projection((9,))
    with pytest.raises(ForcingError):
        force(PruningSchedule.full_space(8), "1", 1, 4096, functional=fn)


def test_force_empty_class_rejected():
    sch = PruningSchedule([(0, {"0", "1"})], 6)
    with pytest.raises(ForcingError):
        force(sch, Dnc2Witness.from_halting_table(100), 1, 100)


def test_force_reports_unsettled_stages():
    # pruning arriving after the stage budget leaves emptiness unsettled
    sch = PruningSchedule([(0, {"11"}), (10 ** 6, {"10"})], 8)
    fn = Functional.projection((5, 6))
    res = force(sch, Dnc2Witness.from_halting_table(4096), 2, 4096, functional=fn)
    assert res.inconclusive == [0, 1]


# ------------------------------------------------------------------ join check

def test_join_check_equal_sets():
    f = "0" * 8
    rep = join_check(f, "01101001", "01101001", 4, 1000, 18)
    assert rep.xor_ok
    # all-zero bits collide with the all-halting small diagonals
    assert not rep.dnc_ok


def test_join_check_xor_mutation_fails():
    x = "0110100110010110"
    y = "1001011001101001"
    f = "1" * 16
    rep = join_check(f, x, y, 4, 1000, 18)
    assert rep.xor_ok
    mutated = "0" + f[1:]
    rep2 = join_check(mutated, x, y, 4, 1000, 18)
    assert not rep2.xor_ok


def test_join_check_brute_force_triple():
    # search short strings for a triple passing all three clauses
    stage, cap, k = 10 ** 4, 18, 4
    found = None
    for xv in range(64):
        x = format(xv, "b").zfill(16)
        w = Dnc2Witness.from_halting_table(stage)
        f = "".join(str(w.value(e)) for e in range(16))
        y = "".join("1" if a != b else "0" for a, b in zip(f, x))
        rep = join_check(f, x, y, k, stage, cap)
        if rep.all_ok:
            found = (f, x, y, rep)
            break
    assert found is not None
    f, x, y, rep = found
    assert rep.xor_ok and rep.dnc_ok and rep.x_random_ok and rep.y_random_ok


def test_join_check_length_mismatch():
    with pytest.raises(ValueError):
        join_check("00", "000", "000", 1, 10, 14)
