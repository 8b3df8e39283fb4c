from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

import pandas as pd
from joblib import Parallel, delayed

from src.config.run_config import RUN_CONFIG
from src.fibred_system.config_io import check_epsilon, format_rational
from src.fibred_system.digit_system import DigitSystem
from src.simplex_sums.sums import simplex_pair
from src.asymptotics.hyperplane import H_sums

logger = logging.getLogger(__name__)

SANDWICH_COLUMNS = [
    "eps", "eps_float", "S", "S_sharp", "H_lower", "H_upper", "H_sharp_lower", "H_sharp_upper",
    "S_over_H_lower", "S_over_H_upper", "S_sharp_over_H_sharp_lower", "S_sharp_over_H_sharp_upper",
    "skipped",
]


def _sandwich_row(sys: DigitSystem, eps: Fraction) -> dict:
    row = dict.fromkeys(SANDWICH_COLUMNS)
    row.update({"eps": format_rational(eps), "eps_float": float(eps)})

    lo_eps = eps / sys.measures[0]
    if lo_eps >= 1:
        row["skipped"] = f"eps / lambda_1 = {lo_eps} >= 1, H is degenerate there"
        logger.info(f"Sandwich row eps={eps} skipped: {row['skipped']}")
        return row

    total, sharp = simplex_pair(sys, eps)
    lower = H_sums(sys, lo_eps)
    upper = H_sums(sys, eps * sys.measures[1])
    row.update({
        "S": total.value,
        "S_sharp": sharp.value,
        "H_lower": lower.H,
        "H_upper": upper.H,
        "H_sharp_lower": lower.H_sharp,
        "H_sharp_upper": upper.H_sharp,
        "S_over_H_lower": total.value / lower.H,
        "S_over_H_upper": total.value / upper.H,
        "S_sharp_over_H_sharp_lower": sharp.value / lower.H_sharp,
        "S_sharp_over_H_sharp_upper": sharp.value / upper.H_sharp,
        "skipped": "",
    })
    return row


def sandwich_check(sys: DigitSystem, eps_list: Sequence, n_jobs: int = 1) -> pd.DataFrame:
    """
    S(eps) and S#(eps) against H at eps / lambda_1 (from below) and at
    eps * lambda_2 (from above), one row per eps.

    Rows where eps / lambda_1 >= 1 carry a ``skipped`` reason and no ratios.
    """
    eps_list = [check_epsilon(e) for e in eps_list]
    rows = Parallel(n_jobs=n_jobs)(delayed(_sandwich_row)(sys, e) for e in eps_list)
    df = pd.DataFrame(rows, columns=SANDWICH_COLUMNS)
    df.attrs["band"] = RUN_CONFIG["sandwich_band"]
    return df
