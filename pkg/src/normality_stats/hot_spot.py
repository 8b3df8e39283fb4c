from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd

from src.config.run_config import RUN_CONFIG
from src.errors import BudgetExceeded
from src.fibred_system.config_io import format_rational
from src.fibred_system.digit_system import DigitSystem, Word, cylinder_measure, word_symbols
from src.enumerator.word_enumerator import WordEnumerator, digit_prefix, prefix_with_epsilons
from src.normality_stats.block_census import block_counts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HotSpotReport:
    N: int
    K: int
    rows: pd.DataFrame
    max_ratio: float
    min_ratio: float


def _report_words(sys: DigitSystem, K: int, config: dict, on_budget: str, tie_break: str) -> list[Word]:
    n_rows = sum(sys.D ** k for k in range(1, K + 1))
    cap = config["hot_spot_row_cap"]
    if n_rows <= cap:
        return [w for k in range(1, K + 1) for w in itertools.product(range(sys.D), repeat=k)]

    if on_budget == "error":
        raise BudgetExceeded(f"{n_rows} words of length <= {K} exceed the row cap {cap}")
    if on_budget != "top":
        raise ValueError(f"on_budget must be 'error' or 'top', got {on_budget!r}")

    logger.warning(f"{n_rows} words of length <= {K} exceed the row cap; keeping the {cap} highest-measure words")
    enum = WordEnumerator(sys, tie_break=tie_break, max_length=K)
    return [w for w, _ in itertools.islice(enum, cap)]


def hot_spot_report(
    sys: DigitSystem,
    N: int,
    K: int,
    config=RUN_CONFIG,
    on_budget: str = "error",
    tie_break: str = RUN_CONFIG["tie_break"],
    prefix: Sequence[int] | None = None,
) -> HotSpotReport:
    """
    Ratio (count(s)/N) / mu(C[s]) for every word with 1 <= |s| <= K.

    Parameters
    ----------
    sys : DigitSystem
    N : int
        Prefix length of x_S.
    K : int
        Maximum block length.
    on_budget : {"error", "top"}
        What to do when the number of words exceeds ``config["hot_spot_row_cap"]``.
    prefix : sequence of int, optional
        Pre-computed digits (the first N are used); computed when omitted.

    Returns
    -------
    HotSpotReport
        rows columns: word, k, count, measure_num, measure_den, frequency, ratio.
    """
    if K < 1 or N < K:
        raise ValueError(f"Need N >= K >= 1, got N={N}, K={K}")

    words = _report_words(sys, K, config, on_budget, tie_break)

    if prefix is None:
        prefix = digit_prefix(sys, N, tie_break)
    prefix = np.asarray(prefix)[:N]
    if prefix.size < N:
        raise ValueError(f"Prefix holds {prefix.size} digits, need {N}")

    censuses = {k: block_counts(prefix, k) for k in {len(w) for w in words}}

    rows = []
    for w in words:
        mu = cylinder_measure(sys, w)
        c = censuses[len(w)].count(w)
        rows.append({
            "word": word_symbols(sys, w),
            "k": len(w),
            "count": c,
            "measure_num": mu.numerator,
            "measure_den": mu.denominator,
            "frequency": c / N,
            "ratio": float(Fraction(c, N) / mu),
        })

    df = pd.DataFrame(rows, columns=["word", "k", "count", "measure_num", "measure_den", "frequency", "ratio"])
    return HotSpotReport(
        N=N,
        K=K,
        rows=df,
        max_ratio=float(df["ratio"].max()),
        min_ratio=float(df["ratio"].min()),
    )


def convergence_table(
    sys: DigitSystem,
    Ns: Sequence[int],
    K: int,
    config=RUN_CONFIG,
    on_budget: str = "error",
    tie_break: str = RUN_CONFIG["tie_break"],
) -> pd.DataFrame:
    """
    For each N: max over |s| <= K of |freq/mu - 1|, the hot-spot extremes,
    eps(N), and the k = K census total (must equal N - K + 1).
    """
    Ns = [int(n) for n in Ns]
    if not Ns:
        return pd.DataFrame(columns=["N", "max_abs_error", "max_ratio", "min_ratio", "eps_N", "census_total"])
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError(f"Ns must be strictly increasing, got {Ns}")

    prefix, eps_list = prefix_with_epsilons(sys, Ns[-1], Ns, tie_break)

    results = []
    for N, eps_N in zip(Ns, eps_list):
        rep = hot_spot_report(sys, N, K, config=config, on_budget=on_budget,
                              tie_break=tie_break, prefix=prefix[:N])
        results.append({
            "N": N,
            "max_abs_error": float((rep.rows["ratio"] - 1.0).abs().max()),
            "max_ratio": rep.max_ratio,
            "min_ratio": rep.min_ratio,
            "eps_N": format_rational(eps_N),
            "census_total": block_counts(prefix[:N], K).total,
        })

    return pd.DataFrame(results)
