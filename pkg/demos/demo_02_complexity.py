#!/usr/bin/env python3
"""Brute-force complexity: witnesses, budgets, and the coding gap.

Run with: python3 demos/demo_02_complexity.py
"""

from fractions import Fraction

from depthlab.complexity import TimeBound, halting_table, k_stage, k_time_bounded
from depthlab.semimeasure import coding_gap, m_stage

# The shortest-program length of a string under a step budget.  Budgets
# come either as absolute stages or as time bounds evaluated at the
# string's length.
t = TimeBound.poly(10, 1)
for sigma in ("", "0", "1", "00"):
    res = k_time_bounded(sigma, t, None, cap=16)
    value = "above-cap" if res.above_cap else res.value
    witness = res.witness.bits if res.witness else "-"
    print(f"K^t({sigma!r:5}) = {value!s:10} witness {witness}")

# More budget never hurts: the stage-s value is nonincreasing in s.
print("\nstage sweep for '00':",
      [k_stage("00", s, None, 16).clamped(16) for s in (0, 1, 2, 5, 50, 500)])

# Summing 2^-|p| over the canonical witnesses stays below 1: that is the
# prefix-freeness of the program format doing arithmetic work.
table = halting_table(None, 16)
omap = table.output_map(10 ** 4, 16)
kraft = sum(Fraction(1, 1 << plen) for plen, _ in omap.values())
print("\nKraft sum over witnesses at cap 16:", kraft, "=", float(kraft))

# The staged semimeasure weighs *all* halting programs, not just the
# shortest, so it can only be heavier than 2^-K; the coding gap factor
# m * 2^K measures by how much, exactly.
for sigma in ("", "0", "11"):
    g = coding_gap(sigma, 10 ** 3, 16)
    print(f"coding gap at {sigma!r:5}: factor {g.factor} "
          f"({0 if g.bits is None else round(g.bits, 3)} bits), "
          f"K = {g.k_value}, mass = {g.mass}")

# Everything above is exact rational arithmetic; floats appear only in
# printed summaries.
print("\nmass of '0' at stage 1000:", m_stage("0", 1000, None, 16))
