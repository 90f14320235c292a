"""Hypothesis strategies shared by the test modules."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from pdi.algebra import random_piecewise, random_step

seeds = st.integers(min_value=0, max_value=2**32 - 1)
steps = seeds.map(lambda s: random_step(random.Random(s)))
piecewise_bodies = seeds.map(lambda s: random_piecewise(random.Random(s)))
bodies = st.one_of(steps, piecewise_bodies)
scalars = st.fractions(min_value=0, max_value=8, max_denominator=16)
positive_scalars = st.fractions(min_value=Fraction(1, 16), max_value=8, max_denominator=16)
levels = st.fractions(min_value=0, max_value=1, max_denominator=32)
