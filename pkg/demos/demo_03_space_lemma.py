#!/usr/bin/env python3
"""Betting tables and the cheap-extension counting bound.

Run with: python3 demos/demo_03_space_lemma.py
"""

import random
from fractions import Fraction

from depthlab.randomness import (
    MartingaleTable,
    count_cheap_extensions,
    random_table,
    space_lemma_length,
)

# A martingale doubles its stake on the branch it bets on and zeroes the
# other, or splits anywhere in between; fairness 2 d(s) = d(s0) + d(s1)
# holds exactly in every table this module accepts.
d = MartingaleTable.from_splits(
    3, lambda s: Fraction(1) if set(s) <= {"0"} else Fraction(1, 2))
print("all-in on zeros: d(000) =", d.value("000"), " d(001) =", d.value("001"))

# However aggressively it bets, a martingale cannot be ahead everywhere:
# among the 2^l extensions of length l = ceil(log2((k+1)/(1 - 1/delta)))
# at least k stay below delta times the current value.
for delta, k in ((Fraction(2), 2), (Fraction(3, 2), 4), (Fraction(3), 8)):
    l = space_lemma_length(delta, k)
    count = count_cheap_extensions(MartingaleTable.constant(6), "", delta, l)
    print(f"delta={delta} k={k}: l={l}, constant table has {count} cheap"
          f" extensions (needs >= {k})")

# The bound survives adversarial randomness: sweep seeded random tables
# and count violations (there are none; the counting argument is exact).
rng = random.Random(7)
violations = 0
for _ in range(2000):
    table = random_table(6, rng)
    for delta, k in ((Fraction(2), 2), (Fraction(2), 4), (Fraction(3), 8)):
        l = space_lemma_length(delta, k)
        if count_cheap_extensions(table, "", delta, l) < k:
            violations += 1
print("violations over 2000 random tables:", violations)

# The doubling-on-zeros table shows the count can exceed the guarantee:
print("doubling table, delta=2, l=2:",
      count_cheap_extensions(d, "", 2, 2), "cheap of 4")
