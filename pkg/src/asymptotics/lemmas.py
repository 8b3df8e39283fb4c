from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from src.config.run_config import RUN_CONFIG


def gaussian_sum_check(Z: float, C: float) -> tuple[float, float, float]:
    """
    sum over |k| <= Z^(2/3) of exp(-C k^2 / Z) against sqrt(pi Z / C).

    Returns
    -------
    (sum, reference, rel_error)
    """
    if Z <= 0 or C <= 0:
        raise ValueError(f"Z and C must be positive, got Z={Z}, C={C}")
    bound = Z ** (2 / 3)
    K = math.floor(bound)
    # 8.0 ** (2/3) == 3.9999999999999996: keep the boundary terms +-K
    while K + 1 <= bound * (1 + 1e-12):
        K += 1
    k = np.arange(-K, K + 1, dtype=np.float64)
    total = float(np.exp(-C * k * k / Z).sum())
    reference = math.sqrt(math.pi * Z / C)
    return total, reference, abs(total / reference - 1)


def gamma_ratio_chain(draws: int = RUN_CONFIG["lemma_draws"], seed: int = RUN_CONFIG["seed"]) -> dict:
    """
    Randomized check of the gamma-ratio chain for 1 <= x <= y, 0 <= delta <= min(1, x - 1):

        Gamma(y - d) / Gamma(x - d)  <<  Gamma(y) / Gamma(x)  <<  Gamma(y + d) / Gamma(x + d)

    together with x - d, x + d comparable to x.  Reports the worst constant
    seen; log-convexity of Gamma puts both ratio constants at 1.
    """
    rng = np.random.default_rng(seed)
    x = 1.0 + 10.0 ** rng.uniform(-3, 3, draws)
    y = x + 10.0 ** rng.uniform(-3, 3, draws)
    d = rng.uniform(0, 1, draws) * np.minimum(1.0, x - 1.0)

    mid = gammaln(y) - gammaln(x)
    lower = (gammaln(y - d) - gammaln(x - d)) - mid
    upper = mid - (gammaln(y + d) - gammaln(x + d))
    shift = np.maximum((x + d) / x, x / (x - d))

    constant = max(math.exp(float(lower.max())), math.exp(float(upper.max())), float(shift.max()))
    return {
        "draws": draws,
        "seed": seed,
        "max_log_lower_ratio": float(lower.max()),
        "max_log_upper_ratio": float(upper.max()),
        "max_shift_ratio": float(shift.max()),
        "constant": constant,
    }


def _random_fraction(rng: random.Random, lo: int, hi: int) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, 50))


def cauchy_schwarz_check(draws: int = RUN_CONFIG["lemma_draws"], seed: int = RUN_CONFIG["seed"],
                         n_max: int = 6) -> dict:
    """
    (sum p)^2 / sum q <= sum p^2 / q for q > 0, in exact rationals.

    A quarter of the draws use p proportional to q, so the equality case is
    exercised; equality must occur exactly when all p_i / q_i coincide.
    """
    rng = random.Random(seed)
    violations = []
    equality_cases = 0
    for _ in range(draws):
        n = rng.randint(1, n_max)
        q = [_random_fraction(rng, 1, 50) for _ in range(n)]
        if rng.random() < 0.25:
            c = _random_fraction(rng, -20, 20)
            p = [c * qi for qi in q]
        else:
            p = [_random_fraction(rng, -50, 50) for _ in range(n)]

        lhs = sum(p, Fraction(0)) ** 2 / sum(q, Fraction(0))
        rhs = sum((pi * pi / qi for pi, qi in zip(p, q)), Fraction(0))
        ratios_equal = len({pi / qi for pi, qi in zip(p, q)}) == 1
        equality_cases += lhs == rhs
        if lhs > rhs or (lhs == rhs) != ratios_equal:
            violations.append({"p": [str(v) for v in p], "q": [str(v) for v in q]})

    return {
        "draws": draws,
        "seed": seed,
        "equality_cases": equality_cases,
        "violations": violations,
        "holds": not violations,
    }
