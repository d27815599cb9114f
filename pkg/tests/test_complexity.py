from fractions import Fraction

import pytest

from depthlab.complexity import (
    ReductionDiverged,
    TimeBound,
    WRAPPER_BITS,
    halting_table,
    identity_reduction,
    k_stage,
    k_time_bounded,
    lift_code,
    lowk_gap,
    result_csv_row,
)
from depthlab.toyvm import PrefixOracle, ZERO, HaltingOracle, assemble, run


def all_strings(max_len):
    for n in range(max_len + 1):
        for v in range(1 << n):
            yield format(v, "b").zfill(n) if n else ""


# ------------------------------------------------------------------ time bounds

def test_time_bound_poly_and_parse():
    t = TimeBound.parse("poly:10,1")
    assert t(0) == 10 and t(3) == 40
    assert t.describe() == "poly:10,1"


def test_time_bound_table(tmp_path):
    path = tmp_path / "tb.txt"
    path.write_text("1 2 2 9\n")
    t = TimeBound.parse(f"table:{path}")
    assert [t(i) for i in range(6)] == [1, 2, 2, 9, 9, 9]
    with pytest.raises(ValueError):
        TimeBound.from_table([3, 1])


# ------------------------------------------------------------------ k queries

def test_k_empty_string():
    res = k_time_bounded("", TimeBound.poly(10, 1), None, 8)
    assert res.value == 1 and res.witness.bits == "1"


def test_k_single_zero_frozen():
    # exhaustive enumeration is the oracle: no program under 9 bits can
    # emit anything, and the first 9-bit emitter is the EMIT0 body
    res = k_time_bounded("0", TimeBound.poly(10, 1), None, 12)
    assert res.value == 9
    assert res.witness.bits == "001010001"
    from depthlab.toyvm import programs_up_to

    independent = [
        p for p in programs_up_to(12)
        if run(p, None, 10 * 2).kind == "halted"
        and run(p, None, 10 * 2).output == "0"
    ]
    assert min(len(p) for p in independent) == 9


def test_k_above_cap_minimal_cap():
    for sigma in ("0", "1", "01"):
        assert k_stage(sigma, 100, None, 2).above_cap
    assert k_stage("", 100, None, 2).value == 1


def test_k_stage_zero():
    assert k_stage("", 0, None, 14).value == 1
    for sigma in ("0", "1", "00"):
        assert k_stage(sigma, 0, None, 14).above_cap


def test_k_stage_anti_monotone_exhaustive():
    stages = [0, 1, 2, 5, 20, 200, 2000]
    cap = 14
    for sigma in all_strings(6):
        values = [k_stage(sigma, s, None, cap).clamped(cap) for s in stages]
        assert all(b <= a for a, b in zip(values, values[1:]))


def test_k_time_bound_is_stage_alignment():
    t = TimeBound.poly(3, 1)
    for sigma in all_strings(3):
        assert k_time_bounded(sigma, t, None, 14) == k_stage(sigma, t(len(sigma)), None, 14)


def test_k_anti_monotone_in_time_bound():
    t1, t2 = TimeBound.poly(1, 1), TimeBound.poly(4, 1)
    cap = 14
    for sigma in all_strings(4):
        assert (k_time_bounded(sigma, t2, None, cap).clamped(cap)
                <= k_time_bounded(sigma, t1, None, cap).clamped(cap))


def test_witness_validity_rerun():
    cap = 16
    for sigma in all_strings(2):
        res = k_stage(sigma, 1000, None, cap)
        if not res.above_cap:
            out = run(res.witness, None, 1000)
            assert out.kind == "halted" and out.output == sigma


def test_kraft_sum_at_most_one():
    table = halting_table(None, 14)
    omap = table.output_map(10 ** 4, 8)
    kraft = sum(Fraction(1, 1 << plen) for plen, _ in omap.values())
    assert kraft <= 1


def test_csv_row_quotes_commas():
    res = k_time_bounded("0", TimeBound.poly(10, 1), None, 12)
    row = result_csv_row("0", "poly:10,1", res)
    assert row == '0,"poly:10,1",9,9:51'


# ------------------------------------------------------------------ gaps

def test_lowk_gap_zero_oracle_exhaustive():
    for sigma in all_strings(6):
        gap = lowk_gap(sigma, ZERO, 1000, 14)
        assert 0 <= gap <= WRAPPER_BITS


def test_lowk_gap_empty_string():
    assert lowk_gap("", ZERO, 1000, 14) == 0


def test_lowk_gap_halting_oracle_reported():
    oracle = HaltingOracle(1000)
    bits = "".join(str(oracle.answer(i)) for i in range(6))
    gaps = [lowk_gap(bits[:n], oracle, 2000, 16) for n in range(1, 7)]
    assert all(g >= 0 for g in gaps)


# ------------------------------------------------------------------ lifting

def test_identity_reduction_answers_base_bits():
    red = identity_reduction()
    oracle = PrefixOracle("0110")
    for i in range(4):
        bit, steps = red.bit(oracle, i)
        assert bit == int("0110"[i])
        assert steps <= red.budget


def test_lift_identity_reproduces_and_costs_wrapper():
    red = identity_reduction()
    t = TimeBound.poly(10, 1)
    for sigma in all_strings(2):
        res = k_time_bounded(sigma, t, ZERO, 16)
        if res.above_cap:
            continue
        lifted, t_prime = lift_code(res.witness, red, t, ZERO, sigma)
        assert len(lifted) == len(res.witness) + WRAPPER_BITS
        out, total = lifted.run_under(ZERO, t_prime(len(sigma)))
        assert out.kind == "halted" and out.output == sigma
        assert total <= t_prime(len(sigma))


def test_lift_zero_rule_roundtrip():
    # base program reads one oracle bit and emits it: needs the oracle
    body = assemble([("ORACLE",), ("EMITR",)])
    from depthlab.toyvm import Program

    tau = Program.encode(body)
    lifted, t_prime = lift_code(tau, identity_reduction(), TimeBound.poly(10, 1),
                                ZERO, "0")
    out, total = lifted.run_under(ZERO, 10 ** 4)
    assert out.kind == "halted" and out.output == "0"


def test_lift_measured_budget_bound():
    # a reduction answering index i in O(i) steps keeps the measured total
    # under t(n) * c * (max queried index + 1)
    red = identity_reduction()
    t = TimeBound.poly(10, 1)
    c = red.budget  # crude per-query ceiling; the measured bound is tighter
    table = halting_table(PrefixOracle("0101"), 16)
    checked = 0
    for p, _step, rope, out_len in table.halted_by(t(4)):
        if out_len > 4:
            continue
        out = run(p, PrefixOracle("0101"), t(4))
        if not out.queried:
            continue
        sigma = out.output
        lifted, t_prime = lift_code(p, red, t, PrefixOracle("0101"), sigma)
        max_idx = max(out.queried)
        assert t_prime(len(sigma)) <= t(len(sigma)) * c * (max_idx + 1)
        checked += 1
        if checked >= 10:
            break
    assert checked > 0


def test_lift_diverging_reduction_raises():
    from depthlab.toyvm import DIVERGE_BODY, Program
    from depthlab.complexity import Reduction

    bad = Reduction(Program.encode(DIVERGE_BODY), 100)
    tau = k_time_bounded("0", TimeBound.poly(10, 1), None, 12).witness
    lifted, _ = lift_code(tau, bad)
    body = assemble([("ORACLE",), ("EMITR",)])
    from depthlab.toyvm import Program as P

    with pytest.raises(ReductionDiverged):
        lift_code(P.encode(body), bad, TimeBound.poly(10, 1), ZERO, "0")
