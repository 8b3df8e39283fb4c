from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Sequence

from src.fibred_system.config_io import check_epsilon
from src.fibred_system.digit_system import CountVector, DigitSystem


def multinomial(m: Sequence[int]) -> int:
    """(m_1 + ... + m_D)! / (m_1! ... m_D!) in exact integers."""
    out, n = 1, 0
    for x in m:
        if x < 0:
            return 0
        n += x
        out *= math.comb(n, x)
    return out


def iter_lattice_terms(measures: Sequence[Fraction], eps) -> Iterator[tuple[CountVector, int]]:
    """
    Yield (m, multinomial(m)) for every m >= 0 with prod measures[d]^m_d >= eps.

    Depth-first over the digits in index order, m_d ascending; the origin is
    included.  With lambda_d = a_d / q and eps = p / r, membership is the
    integer test r * prod a_d^m_d >= p * q^|m|.
    """
    eps = check_epsilon(eps)
    measures = [Fraction(x) for x in measures]
    if not measures:
        yield (), 1
        return
    q = math.lcm(*(x.denominator for x in measures))
    nums = [x.numerator * (q // x.denominator) for x in measures]
    p, r = eps.numerator, eps.denominator
    D = len(measures)

    def walk(d: int, prefix: tuple, num: int, den: int, n: int, coef: int):
        m_d = 0
        while num * r >= p * den:
            point = prefix + (m_d,)
            if d == D - 1:
                yield point, coef
            else:
                yield from walk(d + 1, point, num, den, n, coef)
            # step m_d -> m_d + 1: multinomial grows by (n + 1) / (m_d + 1)
            m_d += 1
            n += 1
            coef = coef * n // m_d
            num *= nums[d]
            den *= q

    yield from walk(0, (), 1, 1, 0, 1)


def lattice_points_T(sys: DigitSystem, eps) -> list[CountVector]:
    """All integer points of T_eps (the origin included)."""
    return [m for m, _ in iter_lattice_terms(sys.measures, eps)]
