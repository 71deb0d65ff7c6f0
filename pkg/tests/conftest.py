from fractions import Fraction

import pytest

from mcf.linalg import seeded_rng


@pytest.fixture
def rng():
    return seeded_rng(20260810)


def random_rational_simplex(rng, d, hi=1 << 20):
    """Random exact interior simplex point with pairwise distinct
    coordinates (avoids partition boundaries for every bundled map)."""
    while True:
        k = [int(v) for v in rng.integers(1, hi, size=d)]
        if len(set(k)) == d:
            s = sum(k)
            return tuple(Fraction(v, s) for v in k)


def random_rational_positive(rng, d, hi=1 << 20):
    return tuple(int(v) for v in rng.integers(1, hi, size=d))
