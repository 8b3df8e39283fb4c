from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import gammaln, logsumexp, xlogy

from src.config.run_config import RUN_CONFIG
from src.errors import NegativeCount, OffSegment
from src.fibred_system.config_io import check_epsilon, format_rational
from src.fibred_system.digit_system import DigitSystem
from src.simplex_sums.lattice import iter_lattice_terms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperplanePoint:
    m_tail: tuple[int, ...]   # integer counts of digits 1..D-1
    M: float                  # real count of digit 0, closing the hyperplane equation

    @property
    def coords(self) -> np.ndarray:
        return np.array((self.M, *self.m_tail), dtype=np.float64)


@dataclass(frozen=True)
class HSums:
    H: float
    H_sharp: float
    log_H: float
    log_H_sharp: float
    n_points: int


def _log_eps(eps: Fraction) -> float:
    return math.log(eps.numerator) - math.log(eps.denominator)


def M_real(sys: DigitSystem, eps, m_tail: Sequence[int]) -> float:
    """
    The real count M of the largest-measure digit that puts
    (M, m_tail) on the hyperplane sum x_d log lambda_d = log eps.

    Raises
    ------
    OffSegment
        If prod lambda_i^m_i < eps for the tail, i.e. M would be negative.
    """
    eps = check_epsilon(eps)
    m_tail = tuple(int(x) for x in m_tail)
    if len(m_tail) != sys.D - 1:
        raise ValueError(f"Tail has {len(m_tail)} entries, expected {sys.D - 1}")
    if any(x < 0 for x in m_tail):
        raise NegativeCount(f"Counts must be non-negative, got {m_tail}")

    tail_measure = math.prod((sys.measures[i + 1] ** x for i, x in enumerate(m_tail)), start=Fraction(1))
    if tail_measure < eps:
        raise OffSegment(f"Tail {m_tail} has measure {tail_measure} < eps = {eps}")

    rest = math.fsum(x * lg for x, lg in zip(m_tail, sys.log_measures[1:]))
    M = (_log_eps(eps) - rest) / sys.log_measures[0]
    # exact membership already holds; only rounding can push M below 0
    return max(M, 0.0)


def hyperplane_points(sys: DigitSystem, eps) -> list[HyperplanePoint]:
    """Every lattice point of H_eps, tails in depth-first lexicographic order."""
    eps = check_epsilon(eps)
    tails = [m for m, _ in iter_lattice_terms(sys.measures[1:], eps)]
    M = _tail_M(sys, eps, np.asarray(tails, dtype=np.float64).reshape(len(tails), sys.D - 1))
    return [HyperplanePoint(t, float(x)) for t, x in zip(tails, M)]


def _tail_M(sys: DigitSystem, eps: Fraction, tails: np.ndarray) -> np.ndarray:
    M = (_log_eps(eps) - tails @ sys.log_measures[1:]) / sys.log_measures[0]
    return np.maximum(M, 0.0)


def _log_terms(sys: DigitSystem, eps: Fraction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(tails, M, log of the Gamma-multinomial) for every point of H_eps."""
    tails = np.asarray([m for m, _ in iter_lattice_terms(sys.measures[1:], eps)], dtype=np.float64)
    tails = tails.reshape(len(tails), sys.D - 1)
    M = _tail_M(sys, eps, tails)
    n = M + tails.sum(axis=1)
    log_sharp = gammaln(n + 1) - gammaln(M + 1) - gammaln(tails + 1).sum(axis=1)
    return tails, M, log_sharp


def H_sums(sys: DigitSystem, eps) -> HSums:
    """
    H(eps) and H#(eps) over the lattice points of H_eps.

    Real factorials are Gamma(x + 1) through ``gammaln``; the sums are
    accumulated with ``logsumexp``.
    """
    eps = check_epsilon(eps, upper_inclusive=False)
    tails, M, log_sharp = _log_terms(sys, eps)
    n = M + tails.sum(axis=1)

    log_H_sharp = float(logsumexp(log_sharp))
    # n > 0 at every point when eps < 1
    log_H = float(logsumexp(log_sharp + np.log(n)))
    return HSums(
        H=math.exp(log_H) if log_H < 709 else math.inf,
        H_sharp=math.exp(log_H_sharp) if log_H_sharp < 709 else math.inf,
        log_H=log_H,
        log_H_sharp=log_H_sharp,
        n_points=len(M),
    )


def f_tilde(x) -> float:
    """(sum x) log(sum x) - sum x_i log x_i, with 0 log 0 = 0."""
    x = np.asarray(x, dtype=np.float64)
    s = x.sum()
    return float(xlogy(s, s) - xlogy(x, x).sum())


def _log_G(M, tails) -> np.ndarray:
    tails = np.atleast_2d(tails)
    n = M + tails.sum(axis=1)
    return 1.5 * np.log(n + 1) - 0.5 * (np.log(M + 1) + np.log(tails + 1).sum(axis=1))


def term_F_G(sys: DigitSystem, eps, m_tail: Sequence[int]) -> tuple[float, float]:
    """
    The Stirling split of one H term: F (the exponent) and G (the
    polynomial factor (n+1)^(3/2) / sqrt((M+1) prod (m_i+1))).
    """
    M = M_real(sys, eps, m_tail)
    tail = np.asarray(m_tail, dtype=np.float64)
    F = f_tilde((M, *tail))
    G = float(np.exp(_log_G(np.array([M]), tail)[0]))
    return F, G


def term_band(sys: DigitSystem, eps) -> pd.DataFrame:
    """
    term / (G e^F) for every point of H_eps, where term is the H summand
    n * Gamma(n+1) / (Gamma(M+1) prod Gamma(m_i+1)).
    """
    eps = check_epsilon(eps, upper_inclusive=False)
    tails, M, log_sharp = _log_terms(sys, eps)
    n = M + tails.sum(axis=1)
    log_term = log_sharp + np.log(n)

    coords = np.column_stack([M, tails])
    F = xlogy(n, n) - xlogy(coords, coords).sum(axis=1)
    ratio = np.exp(log_term - _log_G(M, tails) - F)

    df = pd.DataFrame({
        "m_tail": [tuple(int(v) for v in t) for t in tails],
        "M": M,
        "F": F,
        "log_term": log_term,
        "ratio": ratio,
    })
    df.attrs["eps"] = format_rational(eps)
    df.attrs["min_ratio"] = float(ratio.min())
    df.attrs["max_ratio"] = float(ratio.max())
    return df


def _hbound_row(sys: DigitSystem, eps: Fraction) -> dict:
    h = H_sums(sys, eps)
    log_eps = _log_eps(eps)
    return {
        "eps": format_rational(eps),
        "eps_float": float(eps),
        "H": h.H,
        "H_sharp": h.H_sharp,
        "H_norm": math.exp(h.log_H + log_eps) / abs(log_eps),
        "H_sharp_norm": math.exp(h.log_H_sharp + log_eps),
        "n_points": h.n_points,
    }


def hbound_scan(sys: DigitSystem, eps_list: Sequence, n_jobs: int = 1) -> pd.DataFrame:
    """Rows (eps, H, H#, H eps / |log eps|, H# eps) for a decreasing list of eps."""
    eps_list = [check_epsilon(e, upper_inclusive=False) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")

    rows = Parallel(n_jobs=n_jobs)(delayed(_hbound_row)(sys, e) for e in eps_list)
    df = pd.DataFrame(rows)
    df.attrs["band"] = RUN_CONFIG["hbound_band"]
    return df
