import math
from fractions import Fraction

import numpy as np
import pytest

from src.errors import DegenerateDirection
from src.asymptotics.laplace import concavity_check, second_directional_derivative
from src.asymptotics.lemmas import cauchy_schwarz_check, gamma_ratio_chain, gaussian_sum_check


def test_second_directional_derivative_by_hand():
    assert second_directional_derivative([1, 1], [1, -1]) == pytest.approx(-2)
    with pytest.raises(DegenerateDirection):
        second_directional_derivative([1, 2, 3], [0, 0, 0])
    with pytest.raises(ValueError):
        second_directional_derivative([1, 0], [1, -1])


def test_second_directional_derivative_matches_finite_differences():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.uniform(0.5, 5.0, 4)
        a = rng.standard_normal(4)
        h = 1e-3

        def g(t):
            y = x + t * a
            return y.sum() * math.log(y.sum()) - (y * np.log(y)).sum()

        fd = (g(h) - 2 * g(0) + g(-h)) / h ** 2
        assert fd == pytest.approx(second_directional_derivative(x, a), rel=1e-4, abs=1e-5)


def test_concavity_random_lines(gls3, random_systems):
    report = concavity_check(gls3, Fraction(1, 2 ** 20), trials=10_000, seed=9)
    assert report["all_negative"]
    assert report["max_second_derivative"] < 0
    for sys in random_systems:
        assert concavity_check(sys, Fraction(1, 1000), trials=500, seed=1)["all_negative"]
    with pytest.raises(ValueError):
        concavity_check(gls3, Fraction(1, 8), trials=0)


@pytest.mark.parametrize("C", [0.5, 1.0, 2.0])
def test_gaussian_sum(C):
    total, reference, rel = gaussian_sum_check(1e4, C)
    assert reference == pytest.approx(math.sqrt(math.pi * 1e4 / C))
    assert rel < 1e-2
    assert gaussian_sum_check(1e6, C)[2] < 1e-3


def test_gaussian_sum_reference_scaling():
    assert gaussian_sum_check(1e4, 1.0)[1] == pytest.approx(gaussian_sum_check(1e4 / 4, 1.0 / 4)[1])
    assert gaussian_sum_check(10_000, 1.0)[1] == pytest.approx(177.2454, abs=1e-4)
    with pytest.raises(ValueError):
        gaussian_sum_check(0, 1.0)


@pytest.mark.parametrize("Z", [8.0, 27.0, 1e6])
def test_gaussian_sum_keeps_boundary_terms(Z):
    # Z^(2/3) is an integer here; the sum runs over |k| <= that integer
    K = round(Z ** (2 / 3))
    k = np.arange(-K, K + 1)
    expected = float(np.exp(-k * k / Z).sum())
    assert gaussian_sum_check(Z, 1.0)[0] == pytest.approx(expected, rel=1e-12)


def test_gaussian_sum_Z8_by_hand():
    # exp(-k^2/8) over k = -4..4
    assert gaussian_sum_check(8.0, 1.0)[0] == pytest.approx(4.89803, abs=1e-4)


def test_gamma_ratio_chain():
    report = gamma_ratio_chain(draws=10_000, seed=2)
    # log-convexity of Gamma: both ratios are at most 1
    assert report["max_log_lower_ratio"] <= 1e-9
    assert report["max_log_upper_ratio"] <= 1e-9
    assert report["constant"] <= 2.0 + 1e-9


def test_cauchy_schwarz_exact():
    report = cauchy_schwarz_check(draws=10_000, seed=3)
    assert report["holds"]
    assert report["violations"] == []
    assert report["equality_cases"] >= 2000
