from fractions import Fraction
import random

import pytest

from src.fibred_system.digit_system import make_system


@pytest.fixture
def base10():
    return make_system(["1/10"] * 10)


@pytest.fixture
def base2():
    return make_system(["1/2", "1/2"])


@pytest.fixture
def gls3():
    return make_system(["1/2", "1/4", "1/4"])


def random_system(rng: random.Random, D: int):
    """Random rational measures: integer weights 1..20 normalized to sum 1."""
    weights = [rng.randint(1, 20) for _ in range(D)]
    total = sum(weights)
    return make_system([Fraction(w, total) for w in weights])


@pytest.fixture
def random_systems():
    rng = random.Random(7)
    return [random_system(rng, D) for D in (2, 3, 4, 5, 6)]
