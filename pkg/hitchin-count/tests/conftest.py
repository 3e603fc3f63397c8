import os
import random
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from app.services.polytope import PositiveOrthogonalFamily  # noqa: E402
from app.services.rootdata import Parabolic, make_group, torus  # noqa: E402

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=5, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

B = Parabolic(((0,), (1,)))
B_BAR = Parabolic(((1,), (0,)))


def rationals(bound: int = 8, den: int = 6):
    return st.builds(Fraction, st.integers(-bound * den, bound * den), st.integers(1, den))


def trace_zero(n: int, bound: int = 8, den: int = 6):
    """Strategy for rational vectors of a_T in SL(n)."""
    return st.lists(rationals(bound, den), min_size=n, max_size=n).map(
        lambda v: tuple(x - sum(v) / n for x in v))


@pytest.fixture
def sl2():
    return make_group(2)


@pytest.fixture
def sl3():
    return make_group(3)


@pytest.fixture
def rng():
    return random.Random(7)


def segment(length, start=0) -> PositiveOrthogonalFamily:
    """SL(2) family with hull [start, start + length] * alpha^vee."""
    g = make_group(2)
    lo = Fraction(start)
    hi = lo + Fraction(length)
    return PositiveOrthogonalFamily.build(g, torus(g), {B: (hi, -hi), B_BAR: (lo, -lo)})


@pytest.fixture
def segment_family():
    return segment(3)
