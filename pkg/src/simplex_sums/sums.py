from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import gammaln, logsumexp

from src.config.run_config import RUN_CONFIG
from src.fibred_system.config_io import check_epsilon, format_rational
from src.fibred_system.digit_system import DigitSystem, _check_word, cylinder_measure
from src.simplex_sums.lattice import iter_lattice_terms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SumResult:
    value: int | None      # exact integer (None on the float-only path)
    float_value: float     # log-gamma recomputation
    lattice_count: int

    @property
    def rel_diff(self) -> float | None:
        """|float_value / value - 1|, the exact-vs-log-space agreement."""
        if self.value is None:
            return None
        if self.value == 0:
            return 0.0 if self.float_value == 0 else math.inf
        return abs(self.float_value / self.value - 1.0)


def _log_space_sums(points: np.ndarray) -> tuple[float, float]:
    """S and S# from log-gamma terms with max-shifted (logsumexp) accumulation."""
    if points.size == 0:
        return 0.0, 0.0
    n = points.sum(axis=1)
    log_multi = gammaln(n + 1) - gammaln(points + 1).sum(axis=1)
    s_sharp = float(np.exp(logsumexp(log_multi)))
    pos = n > 0
    s_total = float(np.exp(logsumexp(log_multi[pos] + np.log(n[pos])))) if pos.any() else 0.0
    return s_total, s_sharp


def simplex_pair(sys: DigitSystem, eps, path: str = "exact") -> tuple[SumResult, SumResult]:
    """
    S(eps) and S#(eps) from a single walk over T_eps.

    Parameters
    ----------
    path : {"exact", "float", "both"}
        "exact" and "both" carry exact integers plus the log-space value;
        "float" skips the exact integer accumulation.
    """
    if path not in ("exact", "float", "both"):
        raise ValueError(f"path must be 'exact', 'float' or 'both', got {path!r}")
    eps = check_epsilon(eps)

    exact = path != "float"
    s_total = s_sharp = 0
    points = []
    for m, coef in iter_lattice_terms(sys.measures, eps):
        points.append(m)
        if exact:
            s_sharp += coef
            s_total += sum(m) * coef

    arr = np.asarray(points, dtype=np.float64).reshape(len(points), sys.D)
    f_total, f_sharp = _log_space_sums(arr)
    count = len(points)
    return (
        SumResult(s_total if exact else None, f_total, count),
        SumResult(s_sharp if exact else None, f_sharp, count),
    )


def S_eps(sys: DigitSystem, eps, path: str = "exact") -> SumResult:
    """S(eps): sum over T_eps of |m| * multinomial(m)."""
    return simplex_pair(sys, eps, path)[0]


def S_sharp_eps(sys: DigitSystem, eps, path: str = "exact") -> SumResult:
    """S#(eps): sum over T_eps of multinomial(m); the origin contributes 1."""
    return simplex_pair(sys, eps, path)[1]


def S_for_string(sys: DigitSystem, eps, s: Sequence[int], path: str = "exact") -> SumResult:
    """
    S(eps; s) = S(eps / lambda_s) + S#(eps / lambda_s).

    When eps / lambda_s > 1 no lattice point qualifies and the sum is 0.
    """
    eps = check_epsilon(eps)
    s = _check_word(sys, s)
    if not s:
        raise ValueError("S(eps; s) needs a non-empty word s")

    ratio = eps / cylinder_measure(sys, s)
    if ratio > 1:
        return SumResult(0 if path != "float" else None, 0.0, 0)

    total, sharp = simplex_pair(sys, ratio, path)
    value = None if total.value is None else total.value + sharp.value
    return SumResult(value, total.float_value + sharp.float_value, total.lattice_count)


def S_closed_form_base2(n: int) -> int:
    """S(2^-n) for the uniform binary system: (n - 1) 2^(n+1) + 2."""
    return (n - 1) * 2 ** (n + 1) + 2


def S_sharp_closed_form_base2(n: int) -> int:
    """S#(2^-n) for the uniform binary system: 2^(n+1) - 1."""
    return 2 ** (n + 1) - 1


def log_abs(eps: Fraction) -> float:
    """|log eps| without underflow for tiny rationals."""
    return abs(math.log(eps.numerator) - math.log(eps.denominator))


def parse_eps_range(text: str) -> list[Fraction]:
    """
    "2^-8..2^-40" -> [2^-8, 2^-9, ..., 2^-40]; an optional ":step" is allowed
    ("2^-8..2^-40:4").
    """
    m = re.fullmatch(r"\s*(\d+)\^(-?\d+)\s*\.\.\s*(\d+)\^(-?\d+)\s*(?::\s*(\d+))?\s*", text)
    if not m or m.group(1) != m.group(3):
        raise ValueError(f"Cannot parse eps range {text!r}; expected e.g. '2^-8..2^-40'")
    base = int(m.group(1))
    lo, hi = int(m.group(2)), int(m.group(4))
    step = int(m.group(5) or 1)
    if step < 1:
        raise ValueError(f"Range step must be positive, got {step}")
    direction = -1 if hi < lo else 1
    return [Fraction(base) ** e for e in range(lo, hi + direction, direction * step)]


def _sbound_row(sys: DigitSystem, eps: Fraction, path: str) -> dict:
    total, sharp = simplex_pair(sys, eps, path)
    S = total.value if total.value is not None else total.float_value
    S_sharp = sharp.value if sharp.value is not None else sharp.float_value
    L = log_abs(eps)
    return {
        "eps": format_rational(eps),
        "eps_float": float(eps),
        "S": S,
        "S_sharp": S_sharp,
        "S_norm": 0.0 if L == 0 else float(Fraction(S) * eps) / L,
        "S_sharp_norm": float(Fraction(S_sharp) * eps),
        "lattice_count": total.lattice_count,
        "dual_rel_diff": total.rel_diff,
    }


def sbound_ratio_scan(
    sys: DigitSystem,
    eps_list: Sequence,
    path: str = "exact",
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Rows (eps, S * eps / |log eps|, S# * eps) for a decreasing list of eps.

    A reporting scan: it asserts nothing about the bands itself.
    """
    eps_list = [check_epsilon(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")

    rows = Parallel(n_jobs=n_jobs)(delayed(_sbound_row)(sys, e, path) for e in eps_list)
    df = pd.DataFrame(rows)
    df.attrs["path"] = path
    return df


def band_ratio(values) -> float:
    """max / min of a column of positive values (inf if a value is zero)."""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        return 1.0
    lo = values.min()
    return math.inf if lo <= 0 else float(values.max() / lo)
