"""
Invariant battery behind `verify`.

Each step checks one family of properties for a digit system and returns a
list of result rows; ``run_battery`` runs the steps in order and collects
them into a DataFrame.  A row is ``passed=None`` when the check does not
apply to the system (for example the Taylor box does not fit).
"""
from __future__ import annotations

import itertools
import logging
from fractions import Fraction

import pandas as pd

from src.config.run_config import RUN_CONFIG
from src.errors import BoxOutsideDomain
from src.fibred_system.digit_system import DigitSystem, cylinder_measure
from src.enumerator.word_enumerator import WordEnumerator
from src.enumerator.threshold import counting_bound, threshold_counts
from src.normality_stats.hot_spot import convergence_table
from src.simplex_sums.sums import band_ratio, sbound_ratio_scan, simplex_pair
from src.asymptotics.hyperplane import hbound_scan
from src.asymptotics.laplace import (
    concavity_check,
    gradient_check,
    laplace_maximizer,
    taylor_residual,
)
from src.asymptotics.lemmas import cauchy_schwarz_check, gamma_ratio_chain, gaussian_sum_check
from src.asymptotics.sandwich import sandwich_check

logger = logging.getLogger(__name__)


def _row(check: str, passed, observed, expected, detail: str = "") -> dict:
    return {"check": check, "passed": passed, "observed": observed, "expected": expected, "detail": detail}


def _dyadic(lo: int, hi: int) -> list[Fraction]:
    return [Fraction(1, 2 ** k) for k in range(lo, hi + 1)]


def _lead_powers(sys: DigitSystem, lo_bits: int, hi_bits: int) -> list[Fraction]:
    """Powers lambda_1^k inside [2^-hi_bits, 2^-lo_bits], decreasing.

    S(eps) is a step function of eps; sampling at attained measures keeps
    the step size out of the band ratios.
    """
    lam, out, eps = sys.measures[0], [], sys.measures[0]
    while eps >= Fraction(1, 2 ** hi_bits):
        if eps <= Fraction(1, 2 ** lo_bits):
            out.append(eps)
        eps *= lam
    return out


# -----------------------------
# STEP 1: Enumeration order
# -----------------------------
def check_enumeration(sys: DigitSystem, quick: bool, config=RUN_CONFIG) -> list[dict]:
    n_words = 2_000 if quick else 20_000
    words = []
    measures = []
    for w, m in itertools.islice(WordEnumerator(sys, config["tie_break"]), n_words):
        words.append(w)
        measures.append(m)

    ordered = all(b <= a for a, b in zip(measures, measures[1:]))
    exact = all(cylinder_measure(sys, w) == m for w, m in zip(words, measures))
    distinct = len(set(words)) == len(words)
    return [
        _row("enumeration_non_increasing", ordered, n_words, "measures non-increasing"),
        _row("enumeration_exact_measures", exact, n_words, "measure == product of digit measures"),
        _row("enumeration_distinct", distinct, len(set(words)), n_words),
    ]


# -----------------------------
# STEP 2: Threshold counts vs lattice sums
# -----------------------------
def check_threshold_identities(sys: DigitSystem, quick: bool) -> list[dict]:
    rows = []
    s = (sys.D - 1,)
    for eps in _dyadic(3, 6 if quick else 10):
        counts = threshold_counts(sys, eps, s)
        total, sharp = simplex_pair(sys, eps)
        lam_s = cylinder_measure(sys, s)
        if eps / lam_s <= 1:
            t_s, s_s = simplex_pair(sys, eps / lam_s)
            s_for_s = t_s.value + s_s.value
        else:
            s_for_s = 0
        ok = (counts.a_total == total.value
              and counts.a_sharp == sharp.value - 1
              and counts.a_for_s == s_for_s)
        rows.append(_row(
            f"threshold_identity eps={eps}",
            ok,
            (counts.a_total, counts.a_sharp, counts.a_for_s),
            (total.value, sharp.value - 1, s_for_s),
        ))
    return rows


# -----------------------------
# STEP 3: Exact vs log-space sums
# -----------------------------
def check_dual_path(sys: DigitSystem, quick: bool, config=RUN_CONFIG) -> list[dict]:
    eps_list = _dyadic(8, 12 if quick else 20)
    worst = 0.0
    for eps in eps_list:
        total, sharp = simplex_pair(sys, eps, path="both")
        if total.value > config["dual_path_max_value"]:
            break
        worst = max(worst, total.rel_diff, sharp.rel_diff)
    return [_row("dual_path_rel_diff", worst <= config["dual_path_rel_tol"], worst,
                 f"<= {config['dual_path_rel_tol']}")]


# -----------------------------
# STEP 4: Normality statistics
# -----------------------------
def check_normality(sys: DigitSystem, quick: bool, config=RUN_CONFIG) -> list[dict]:
    K = config["default_K"]
    Ns = [10_000, 100_000] if quick else [10_000, 100_000, 1_000_000]
    table = convergence_table(sys, Ns, K, config=config, on_budget="top")

    census_ok = bool((table["census_total"] == table["N"] - K + 1).all())
    errors = table["max_abs_error"].tolist()
    shrinking = errors[-1] < errors[0]

    bound = counting_bound(sys, Ns[0], (0,), tie_break=config["tie_break"])
    bound_ok = bound["bound"] is None or bound["observed_freq"] <= bound["bound"]
    return [
        _row("census_total", census_ok, table["census_total"].tolist(), [N - K + 1 for N in Ns]),
        _row("hot_spot_error_shrinks", shrinking, errors, "last < first"),
        _row("counting_bound", bound_ok, bound["observed_freq"], bound["bound"]),
    ]


# -----------------------------
# STEP 5: Maximizer, gradient, Hessian
# -----------------------------
def check_laplace(sys: DigitSystem, seed: int, config=RUN_CONFIG) -> list[dict]:
    a = laplace_maximizer(sys, Fraction(1, 2 ** 20), config)
    b = laplace_maximizer(sys, Fraction(1, 2 ** 40), config)

    fmax_err = abs(a.f_at_p + a.log_eps) / abs(a.log_eps)
    grad = gradient_check(sys, a.eps, config["gradient_directions"], seed)
    drift = float(abs(a.hessian_A - b.hessian_A).max())
    return [
        _row("fmax_identity", fmax_err <= config["fmax_rel_tol"], fmax_err, f"<= {config['fmax_rel_tol']}"),
        _row("gradient_zero", grad <= config["gradient_abs_tol"], grad, f"<= {config['gradient_abs_tol']}"),
        _row("hessian_closed_form", a.hessian_rel_diff <= config["hessian_rel_tol"], a.hessian_rel_diff,
             f"<= {config['hessian_rel_tol']}"),
        _row("hessian_eps_independent", drift <= config["hessian_eps_tol"], drift, f"<= {config['hessian_eps_tol']}"),
        _row("eigenvalues_positive", bool((a.eigenvalues > config["eig_tol"]).all()), a.eigenvalues.tolist(), "> 0"),
    ]


# -----------------------------
# STEP 6: Concavity and Taylor residual
# -----------------------------
def check_concavity_taylor(sys: DigitSystem, seed: int, quick: bool, config=RUN_CONFIG) -> list[dict]:
    trials = 1_000 if quick else config["concavity_trials"]
    conc = concavity_check(sys, Fraction(1, 2 ** 20), trials, seed)
    rows = [_row("concavity", conc["all_negative"], conc["max_second_derivative"], "< 0")]

    samples = 100 if quick else config["taylor_samples"]
    # first eps = 2^-k (k doubling) for which the box fits
    for k in (20, 40, 80, 160, 320, 640):
        try:
            r1 = taylor_residual(sys, Fraction(1, 2 ** k), samples, seed, config=config)
            r2 = taylor_residual(sys, Fraction(1, 2 ** (k + 10)), samples, seed, config=config)
        except BoxOutsideDomain:
            continue
        rows.append(_row("taylor_non_growth", r2 <= 2 * max(r1, 1e-12), (r1, r2),
                         "residual(2^-(k+10)) <= 2 residual(2^-k)", f"k={k}"))
        return rows

    rows.append(_row("taylor_non_growth", None, None, None, "box does not fit for eps >= 2^-650"))
    return rows


# -----------------------------
# STEP 7: Scalar lemmas
# -----------------------------
def check_lemmas(seed: int, quick: bool, config=RUN_CONFIG) -> list[dict]:
    draws = 1_000 if quick else config["lemma_draws"]
    _, _, gauss_err = gaussian_sum_check(1e4, 1.0)
    gamma = gamma_ratio_chain(draws, seed)
    cs = cauchy_schwarz_check(draws, seed)
    return [
        _row("gaussian_sum", gauss_err < 1e-2, gauss_err, "< 1e-2"),
        _row("gamma_ratio_chain", gamma["constant"] <= 2.0 + 1e-9, gamma["constant"], "<= 2"),
        _row("cauchy_schwarz", cs["holds"], len(cs["violations"]), 0, f"equality cases {cs['equality_cases']}"),
    ]


# -----------------------------
# STEP 8: Asymptotic bands
# -----------------------------
def check_bands(sys: DigitSystem, quick: bool, config=RUN_CONFIG) -> list[dict]:
    eps_s = _lead_powers(sys, 8, 14 if quick else 24)
    if len(eps_s) < 2:
        return [_row(name, None, None, None, "fewer than two powers of lambda_1 in range")
                for name in ("sbound_band", "sandwich_band", "hbound_band")]

    sb = sbound_ratio_scan(sys, eps_s)
    s_band = max(band_ratio(sb["S_norm"]), band_ratio(sb["S_sharp_norm"]))

    sw = sandwich_check(sys, eps_s)
    sw = sw[sw["skipped"] == ""]
    # the sandwich constant grows like 1 / lambda_1 (base b gives b^2 / (b - 1))
    c = config["sandwich_band"] * max(1.0, 1 / (2 * float(sys.measures[0])))
    ratio_cols = ["S_over_H_lower", "S_over_H_upper", "S_sharp_over_H_sharp_lower", "S_sharp_over_H_sharp_upper"]
    ratios = sw[ratio_cols].to_numpy(dtype=float)
    sandwich_ok = bool(((ratios >= 1 / c) & (ratios <= c)).all())

    hi = 30 if quick else (60 if sys.D <= 3 else 36)
    hb = hbound_scan(sys, _lead_powers(sys, 8, hi))
    h_band = max(band_ratio(hb["H_norm"]), band_ratio(hb["H_sharp_norm"]))
    return [
        _row("sbound_band", s_band <= config["sbound_band"], s_band, f"<= {config['sbound_band']}"),
        _row("sandwich_band", sandwich_ok,
             [float(ratios.min()), float(ratios.max())] if ratios.size else None, f"[1/{c}, {c}]"),
        _row("hbound_band", h_band <= config["hbound_band"], h_band, f"<= {config['hbound_band']}"),
    ]


# -----------------------------
# MASTER BATTERY
# -----------------------------
def run_battery(sys: DigitSystem, seed: int = RUN_CONFIG["seed"], quick: bool = False,
                config=RUN_CONFIG) -> pd.DataFrame:
    """
    Run every invariant check on one system.

    Returns
    -------
    pd.DataFrame
        One row per check: check, passed (True/False/None), observed,
        expected, detail.
    """
    rows = []

    # 1. Enumeration order
    rows += check_enumeration(sys, quick, config)

    # 2. Threshold counts vs lattice sums
    rows += check_threshold_identities(sys, quick)

    # 3. Exact vs log-space sums
    rows += check_dual_path(sys, quick, config)

    # 4. Normality statistics
    rows += check_normality(sys, quick, config)

    # 5. Maximizer, gradient, Hessian
    rows += check_laplace(sys, seed, config)

    # 6. Concavity and Taylor residual
    rows += check_concavity_taylor(sys, seed, quick, config)

    # 7. Scalar lemmas
    rows += check_lemmas(seed, quick, config)

    # 8. Asymptotic bands
    rows += check_bands(sys, quick, config)

    for r in rows:
        if r["passed"] is False:
            logger.error(f"{r['check']}: observed {r['observed']}, expected {r['expected']}")
        else:
            logger.info(f"{r['check']}: {'skipped' if r['passed'] is None else 'ok'}")

    return pd.DataFrame(rows, columns=["check", "passed", "observed", "expected", "detail"])


def battery_failed(results: pd.DataFrame) -> bool:
    return bool((results["passed"] == False).any())  # noqa: E712
