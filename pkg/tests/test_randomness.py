import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthlab.complexity import TimeBound
from depthlab.randomness import (
    DYADIC_SPLITS,
    FairnessError,
    MartingaleTable,
    count_cheap_extensions,
    deficiency,
    default_builder_martingale,
    dyadic_family,
    exact_ceil_log2,
    machine_supermartingale,
    measure_cheap_oracles,
    psi,
    psi_average,
    psi_domination_constant,
    random_table,
    space_lemma_length,
)
from depthlab.semimeasure import m_stage, oracle_average


def all_strings(max_len):
    for n in range(max_len + 1):
        for v in range(1 << n):
            yield format(v, "b").zfill(n) if n else ""


# ------------------------------------------------------------------ lengths

def test_exact_ceil_log2():
    assert exact_ceil_log2(Fraction(6)) == 3
    assert exact_ceil_log2(Fraction(4)) == 2
    assert exact_ceil_log2(Fraction(1)) == 0
    assert exact_ceil_log2(Fraction(1, 3)) == -1
    with pytest.raises(ValueError):
        exact_ceil_log2(Fraction(0))


def test_space_lemma_length_frozen():
    assert space_lemma_length(2, 2) == 3
    assert space_lemma_length(2, 1) == 2
    # first builder round: delta = 1 + 1/1, k = 2^1
    assert space_lemma_length(1 + Fraction(1, 1), 2) == 3


def test_space_lemma_rejects_delta_at_most_one():
    with pytest.raises(ValueError):
        space_lemma_length(1, 2)
    with pytest.raises(ValueError):
        space_lemma_length(Fraction(1, 2), 2)


# ------------------------------------------------------------------ tables

def test_constant_table_all_extensions_cheap():
    d = MartingaleTable.constant(4)
    for delta in (Fraction(3, 2), Fraction(2), Fraction(3)):
        assert count_cheap_extensions(d, "", delta, 2) == 4


def test_doubling_along_zeros():
    d = MartingaleTable.from_splits(
        2, lambda s: Fraction(1) if set(s) <= {"0"} else Fraction(1, 2))
    assert d.value("00") == 4 and d.value("01") == 0
    count = count_cheap_extensions(d, "", 2, 2)
    assert count == 3
    assert count >= 1  # k = 1 is what l = 2 guarantees at delta = 2


def test_depth_violation():
    d = MartingaleTable.constant(3)
    with pytest.raises(ValueError):
        count_cheap_extensions(d, "00", 2, 2)


def test_fairness_validation():
    with pytest.raises(FairnessError):
        MartingaleTable(1, {"": Fraction(1), "0": Fraction(1), "1": Fraction(2)})
    with pytest.raises(FairnessError):
        MartingaleTable(1, {"": Fraction(1), "0": Fraction(1)})


def test_table_file_roundtrip(tmp_path):
    d = MartingaleTable.from_splits(3, lambda s: Fraction(1, 4))
    path = tmp_path / "mart.tsv"
    d.to_file(path)
    again = MartingaleTable.from_file(path)
    assert again.values == d.values and again.depth == d.depth


def test_flat_extension_below_depth():
    d = MartingaleTable.constant(2, Fraction(5))
    assert d.value("01011") == Fraction(5)


# ------------------------------------------------------------------ the counting bound

def test_dyadic_family_guarantee_exhaustive():
    grid = ((Fraction(3, 2), 1), (Fraction(2), 1), (Fraction(2), 2), (Fraction(3), 3))
    for table in dyadic_family(3):
        for delta, k in grid:
            l = space_lemma_length(delta, k)
            if l > 3:
                continue
            for sigma in all_strings(3 - l):
                if table.value(sigma) > 0:
                    assert count_cheap_extensions(table, sigma, delta, l) >= k


def test_random_tables_guarantee_sampled():
    rng = random.Random(7)
    grid = ((Fraction(3, 2), 4), (Fraction(2), 4), (Fraction(3), 8))
    for _ in range(1000):
        table = random_table(6, rng)
        for delta, k in grid:
            l = space_lemma_length(delta, k)
            assert count_cheap_extensions(table, "", delta, l) >= k


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3 ** 7 - 1), st.sampled_from([Fraction(3, 2), 2, 3]),
       st.integers(1, 4))
def test_counting_guarantee_property(code, delta, k):
    splits = []
    c = code
    for _ in range(7):
        splits.append(DYADIC_SPLITS[c % 3])
        c //= 3
    nodes = [s for s in all_strings(2)]
    assign = dict(zip(nodes, splits))
    table = MartingaleTable.from_splits(3, lambda s: assign[s])
    l = space_lemma_length(delta, k)
    if l <= 3:
        assert count_cheap_extensions(table, "", delta, l) >= k


# ------------------------------------------------------------------ supermartingales

def test_machine_supermartingale_inequality_and_monotone():
    d = machine_supermartingale(None, 16)
    for sigma in all_strings(2):
        for s in (0, 5, 100, 1000):
            assert 2 * d(sigma, s) >= d(sigma + "0", s) + d(sigma + "1", s)
        assert d(sigma, 10) <= d(sigma, 1000)


def test_builder_mixture_positive_and_super():
    d = default_builder_martingale(None, 16)
    for sigma in all_strings(3):
        assert d(sigma, 1000) > 0
        assert 2 * d(sigma, 1000) >= d(sigma + "0", 1000) + d(sigma + "1", 1000)


# ------------------------------------------------------------------ deficiency

def test_deficiency_empty_string():
    rec = deficiency("", 100, 14)
    assert rec.value == -1 and rec.argmax == 0


def test_deficiency_monotone_in_stage():
    for sigma in ("0", "0000", "0101"):
        assert (deficiency(sigma, 1, 16).value
                <= deficiency(sigma, 100, 16).value
                <= deficiency(sigma, 10 ** 4, 16).value)


def test_deficiency_lower_bound():
    # the n = 0 term is always -K_stage(empty string) = -1 on this machine
    for sigma in all_strings(4):
        rec = deficiency(sigma, 1000, 16)
        assert rec.value >= -1


# ------------------------------------------------------------------ psi

def test_psi_zero_denominator_terms_dropped():
    # a zero time bound starves every nonempty output of t'-mass
    t = TimeBound.poly(5, 1)
    t_zero = TimeBound.poly(0, 0)
    res = psi("0000", t, t_zero, Fraction(1), 2, 100, 14)
    assert res.dropped_terms > 0
    from depthlab.semimeasure import relative_mass

    lam_term = (m_stage("", 100, None, 14)
                * relative_mass("", "0000", t(0), 14) / m_stage("", 0, None, 14))
    assert res.value == lam_term


def test_psi_cancellation_when_queries_cannot_fit():
    # cap 8 holds no ORACLE instruction, so the relative and plain masses
    # agree and the quotient telescopes to the staged mass
    t = TimeBound.poly(10, 1)
    res = psi("0000", t, t, Fraction(1), 2, 100, 8)
    manual = Fraction(0)
    for sigma in all_strings(2):
        if m_stage(sigma, t(len(sigma)), None, 8) > 0:
            manual += m_stage(sigma, 100, None, 8)
    assert res.value == manual and res.dropped_terms == 0


def test_psi_monotone_in_len_cap_and_stage():
    t = TimeBound.poly(5, 1)
    vals = [psi("0000", t, t, Fraction(1), L, 100, 14).value for L in (0, 1, 2)]
    assert vals[0] <= vals[1] <= vals[2]
    stages = [psi("0000", t, t, Fraction(1), 2, s, 14).value for s in (1, 10, 100)]
    assert stages[0] <= stages[1] <= stages[2]


def test_psi_average_at_most_one_with_measured_constant():
    t = TimeBound.poly(5, 1)
    c_star = psi_domination_constant(t, t, 1, 3, 12)
    avg = psi_average(t, t, c_star, 1, 1000, 3, 12)
    assert avg <= 1


def test_psi_rejects_bad_constant():
    t = TimeBound.poly(5, 1)
    with pytest.raises(ValueError):
        psi("00", t, t, Fraction(0), 1, 10, 12)


# ------------------------------------------------------------------ cheap oracles

def test_measure_cheap_large_k_empty():
    t = TimeBound.poly(10, 1)
    assert measure_cheap_oracles("0000", 1, Fraction(10 ** 9), t, t(1), 4, 14) == 0


def test_measure_cheap_k1_without_consultation():
    # relative mass dominates the plain mass, so the ratio is always >= 1
    t = TimeBound.poly(10, 1)
    assert measure_cheap_oracles("0000", 1, 1, t, t(1), 4, 14) == 1


def test_measure_cheap_markov_bound_exact():
    t = TimeBound.poly(10, 1)
    x = "0000"
    n = 1
    base = m_stage(x[:n], t(n), None, 12)
    c_const = oracle_average(x[:n], t, 12, 4) / base
    for k in (1, 2, 4, 8):
        mu = measure_cheap_oracles(x, n, k, t, t(n), 4, 12)
        assert mu <= c_const / k


def test_measure_cheap_nonincreasing_in_k():
    t = TimeBound.poly(10, 1)
    vals = [measure_cheap_oracles("1111", 1, k, t, 50, 4, 15) for k in (1, 2, 4, 8)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
