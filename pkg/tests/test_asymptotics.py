import math
import random
from fractions import Fraction

import numpy as np
import pytest

from src.errors import BoxOutsideDomain, EpsilonOutOfRange, OffSegment
from src.simplex_sums.sums import band_ratio
from src.asymptotics.hyperplane import (
    H_sums,
    M_real,
    f_tilde,
    hbound_scan,
    hyperplane_points,
    term_F_G,
    term_band,
)
from src.asymptotics.laplace import (
    F_reduced,
    gradient_check,
    hessian_closed_form,
    laplace_constant,
    laplace_maximizer,
    taylor_error_at,
    taylor_residual,
    taylor_slice,
)
from src.asymptotics.sandwich import sandwich_check

LOG2 = math.log(2)


def _random_eps(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 1000), 1000 * 2 ** rng.randint(1, 40))


def test_M_real_examples(base2, gls3):
    assert M_real(base2, Fraction(1, 4), (1,)) == pytest.approx(1)
    assert M_real(gls3, Fraction(1, 8), (1, 0)) == pytest.approx(1)
    with pytest.raises(OffSegment):
        M_real(base2, Fraction(1, 4), (3,))


def test_hyperplane_points_lie_on_hyperplane(gls3):
    eps = Fraction(1, 2 ** 12)
    for pt in hyperplane_points(gls3, eps):
        assert pt.M >= 0
        assert float(pt.coords @ gls3.log_measures) == pytest.approx(-12 * LOG2, abs=1e-10)


def test_H_sums_small_base2(base2):
    h = H_sums(base2, Fraction(1, 2))
    assert h.H_sharp == pytest.approx(2, rel=1e-12)
    assert h.H == pytest.approx(2, rel=1e-12)
    with pytest.raises(EpsilonOutOfRange):
        H_sums(base2, 1)


def test_H_sums_base2_closed_form(base2):
    for n in range(1, 31):
        h = H_sums(base2, Fraction(1, 2 ** n))
        assert h.H_sharp == pytest.approx(2 ** n, rel=1e-9)
        assert h.H == pytest.approx(n * 2 ** n, rel=1e-9)


def test_H_sums_gls3_band(gls3):
    h = H_sums(gls3, Fraction(1, 2 ** 10))
    assert 0.5 <= h.H_sharp * 2 ** -10 <= 2.5


def test_f_tilde_examples():
    assert f_tilde((1, 1)) == pytest.approx(2 * LOG2)
    assert f_tilde((5.0, 0, 0)) == 0
    assert f_tilde((1, 0.5, 0.5)) == pytest.approx(3 * LOG2)
    x = np.array([0.3, 1.7, 2.2])
    assert f_tilde(3.5 * x) == pytest.approx(3.5 * f_tilde(x))


def test_term_F_G_examples(base2, gls3):
    F, G = term_F_G(base2, Fraction(1, 4), (1,))
    assert F == pytest.approx(2 * LOG2)
    assert G == pytest.approx(3 ** 1.5 / 2)
    F_vertex, _ = term_F_G(gls3, Fraction(1, 2 ** 10), (0, 0))
    assert F_vertex == pytest.approx(0, abs=1e-12)


def test_term_band_base2(base2):
    df = term_band(base2, Fraction(1, 2 ** 20))
    assert len(df) == 21
    assert df.attrs["max_ratio"] / df.attrs["min_ratio"] <= 4
    assert 0.1 <= df.attrs["min_ratio"] and df.attrs["max_ratio"] <= 10


def test_laplace_maximizer_base2(base2):
    a = laplace_maximizer(base2, Fraction(1, 4))
    assert a.L == pytest.approx(2)
    assert a.p == pytest.approx([1, 1])
    assert a.f_at_p == pytest.approx(2 * LOG2, rel=1e-12)
    assert a.hessian_A.shape == (1, 1)
    assert a.hessian_A[0, 0] == pytest.approx(4 * LOG2, abs=1e-9)
    assert a.eigenvalues[0] > 0


def test_laplace_maximizer_gls3(gls3):
    a = laplace_maximizer(gls3, Fraction(1, 8))
    assert a.L == pytest.approx(2)
    assert a.p == pytest.approx([1, 0.5, 0.5])
    assert a.f_at_p == pytest.approx(3 * LOG2)
    # A = 1.5 log 2 * [[11, 7], [7, 11]]
    assert a.hessian_A == pytest.approx(1.5 * LOG2 * np.array([[11, 7], [7, 11]]), abs=1e-9)
    with pytest.raises(EpsilonOutOfRange):
        laplace_maximizer(gls3, 1)


def test_fmax_identity_random(random_systems):
    rng = random.Random(3)
    for _ in range(20):
        for sys in random_systems:
            eps = _random_eps(rng)
            a = laplace_maximizer(sys, eps)
            assert abs(a.f_at_p / (-a.log_eps) - 1) <= 1e-9


def test_gradient_vanishes_random(random_systems):
    rng = random.Random(5)
    for sys in random_systems:
        eps = _random_eps(rng)
        assert gradient_check(sys, eps, directions=50, seed=1) <= 1e-7


def test_hessian_properties_random(random_systems):
    for sys in random_systems:
        a = laplace_maximizer(sys, Fraction(1, 2 ** 20))
        b = laplace_maximizer(sys, Fraction(1, 2 ** 40))
        assert np.allclose(a.hessian_A, a.hessian_A.T, atol=1e-12)
        assert np.abs(a.hessian_A - b.hessian_A).max() <= 1e-6
        assert (a.eigenvalues > 0).all()
        assert a.hessian_rel_diff <= 1e-5


def test_hessian_closed_form_matches_reduced_function(gls3):
    eps = Fraction(1, 2 ** 30)
    x = np.array([4.0, 7.5])
    h = 1e-3
    H = hessian_closed_form(gls3, eps, x)
    e0 = np.array([h, 0.0])
    d2 = (F_reduced(gls3, eps, x + e0) - 2 * F_reduced(gls3, eps, x) + F_reduced(gls3, eps, x - e0)) / h ** 2
    assert d2 == pytest.approx(H[0, 0], rel=1e-5)


def test_taylor_residual_base2(base2):
    a = laplace_maximizer(base2, Fraction(1, 2 ** 20))
    assert taylor_error_at(a, base2, [0.0]) == pytest.approx(0, abs=1e-10)

    r20 = taylor_residual(base2, Fraction(1, 2 ** 20), samples=1000, seed=1)
    r30 = taylor_residual(base2, Fraction(1, 2 ** 30), samples=1000, seed=1)
    assert r30 <= 2 * r20
    literal = taylor_residual(base2, Fraction(1, 2 ** 20), samples=1000, seed=1, convention="literal")
    assert literal > r20


def test_taylor_box_outside_domain(gls3):
    with pytest.raises(BoxOutsideDomain):
        taylor_residual(gls3, Fraction(1, 2 ** 20), samples=10)
    # the first coordinate moves by up to 4r, so the box only fits for very small eps
    r400 = taylor_residual(gls3, Fraction(1, 2 ** 400), samples=200, seed=2)
    r410 = taylor_residual(gls3, Fraction(1, 2 ** 410), samples=200, seed=2)
    assert r410 <= 2 * r400


def test_taylor_slice_third_order_bound(base2, gls3):
    for sys, eps in [(base2, Fraction(1, 2 ** 20)), (gls3, Fraction(1, 2 ** 400))]:
        df = taylor_slice(sys, eps, axis=0, n_points=41)
        assert (df["residual"] <= df["third_order_bound"] * (1 + 1e-6) + 1e-9).all()


def test_laplace_constant_base2(base2):
    const = laplace_constant(base2)
    assert const["H_sharp_eps_limit"] == pytest.approx(1, abs=1e-9)
    assert const["H_norm_limit"] == pytest.approx(1 / LOG2, abs=1e-9)


def test_laplace_constant_gls3_predicts_H_sharp(gls3):
    const = laplace_constant(gls3)
    assert const["H_sharp_eps_limit"] == pytest.approx(2 / 3, rel=1e-9)
    h = H_sums(gls3, Fraction(1, 2 ** 60))
    assert h.H_sharp * 2.0 ** -60 == pytest.approx(2 / 3, rel=0.1)


def test_sandwich_base2_limits(base2):
    eps_list = [Fraction(1, 2 ** n) for n in (1, 8, 40)]
    df = sandwich_check(base2, eps_list)
    assert df["skipped"].iloc[0] != ""
    assert df["S"].iloc[0] is None or np.isnan(df["S_over_H_lower"].iloc[0])
    last = df.iloc[-1]
    assert last["S_over_H_lower"] == pytest.approx(4, rel=0.1)
    assert last["S_over_H_upper"] == pytest.approx(1, rel=0.1)


def test_sandwich_gls3_band(gls3):
    df = sandwich_check(gls3, [Fraction(1, 2 ** n) for n in range(8, 25)])
    cols = ["S_over_H_lower", "S_over_H_upper", "S_sharp_over_H_sharp_lower", "S_sharp_over_H_sharp_upper"]
    ratios = df[cols].to_numpy(dtype=float)
    assert ((ratios >= 1 / 8) & (ratios <= 8)).all()


def test_hbound_scan_band(gls3, base2):
    for sys in (gls3, base2):
        df = hbound_scan(sys, [Fraction(1, 2 ** n) for n in range(8, 61)])
        assert band_ratio(df["H_norm"]) <= 4
        assert band_ratio(df["H_sharp_norm"]) <= 4
    assert df["H_sharp_norm"].to_numpy() == pytest.approx(1, rel=1e-9)
