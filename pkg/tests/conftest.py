import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from transq.model import model_from_rate, model_from_sequence


def random_model(rng: random.Random, n: int):
    """Strictly decreasing random rational rates ending in 0, random rational mu."""
    rates = set()
    while len(rates) < n - 1:
        rates.add(Fraction(rng.randint(1, 60), rng.randint(1, 12)))
    seq = sorted(rates, reverse=True) + [Fraction(0)]
    mu = Fraction(rng.randint(1, 30), rng.randint(1, 9))
    return model_from_sequence(seq, mu)


def random_models(n: int, count: int, seed: int):
    rng = random.Random(seed * 1000 + n)
    return [random_model(rng, n) for _ in range(count)]


positive_fractions = st.builds(
    Fraction, st.integers(1, 40), st.integers(1, 10))


@st.composite
def models(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    rates = draw(st.lists(positive_fractions, min_size=n - 1, max_size=n - 1, unique=True))
    mu = draw(positive_fractions)
    return model_from_sequence(sorted(rates, reverse=True) + [0], mu)


@pytest.fixture
def m3():
    return model_from_rate(3, 1, 1)


@pytest.fixture
def m2():
    return model_from_rate(2, 1, 1)
