from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from src.errors import (
    DigitOutOfRange,
    NegativeCount,
    NonPositiveMeasure,
    SumNotOne,
    TooFewDigits,
)

logger = logging.getLogger(__name__)

Word = tuple[int, ...]
CountVector = tuple[int, ...]
# exact cylinder measure; Fraction is always reduced with a positive denominator
MeasureKey = Fraction


@dataclass(frozen=True)
class DigitSystem:
    """
    Finite-digit product-measure system (generalized Lüroth series).

    Digits are stored by decreasing measure: internal index 0 carries the
    largest measure, index 1 the second largest.  ``user_order[i]`` is the
    position the internal digit ``i`` had in the user's list.
    """
    measures: tuple[Fraction, ...]
    symbols: tuple[str, ...]
    user_order: tuple[int, ...]
    log_measures: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        logs = np.array([math.log(m.numerator) - math.log(m.denominator) for m in self.measures])
        logs.setflags(write=False)
        object.__setattr__(self, "log_measures", logs)

    @property
    def D(self) -> int:
        return len(self.measures)

    @property
    def common_denominator(self) -> int:
        return math.lcm(*(m.denominator for m in self.measures))

    @property
    def scaled_numerators(self) -> tuple[int, ...]:
        # lambda_d = scaled_numerators[d] / common_denominator
        q = self.common_denominator
        return tuple(m.numerator * (q // m.denominator) for m in self.measures)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.measures)) == 1


def make_system(measures: Sequence, symbols: Sequence[str] | None = None) -> DigitSystem:
    """
    Validate a list of digit measures and return the sorted DigitSystem.

    Parameters
    ----------
    measures : sequence of Fraction | int | str
        Measures in user order.  Strings may be "p/q", "2^-k" or decimals.
    symbols : sequence of str, optional
        User-facing digit symbols.  Defaults to "0", "1", ... by user position.

    Returns
    -------
    DigitSystem
        Digits sorted by decreasing measure; ties keep the user order.
    """
    from src.fibred_system.config_io import parse_rational

    values = [parse_rational(m) for m in measures]
    if len(values) < 2:
        raise TooFewDigits(f"A digit system needs at least 2 digits, got {len(values)}")

    bad = [str(v) for v in values if v <= 0]
    if bad:
        raise NonPositiveMeasure(f"Digit measures must be positive, got {bad}")

    total = sum(values, Fraction(0))
    if total != 1:
        raise SumNotOne(f"Digit measures must sum to exactly 1, got {total}")

    if symbols is None:
        symbols = [str(i) for i in range(len(values))]
    symbols = [str(s) for s in symbols]
    if len(symbols) != len(values):
        raise ValueError(f"Got {len(symbols)} symbols for {len(values)} measures")
    if len(set(symbols)) != len(symbols):
        raise ValueError(f"Digit symbols must be distinct, got {symbols}")

    # stable: equal measures keep the user order
    order = sorted(range(len(values)), key=lambda i: -values[i])
    if order != list(range(len(values))):
        logger.info(f"Digits re-indexed by decreasing measure: user positions {order}")

    return DigitSystem(
        measures=tuple(values[i] for i in order),
        symbols=tuple(symbols[i] for i in order),
        user_order=tuple(order),
    )


def _check_word(sys: DigitSystem, w: Iterable[int]) -> Word:
    w = tuple(int(d) for d in w)
    for d in w:
        if d < 0 or d >= sys.D:
            raise DigitOutOfRange(f"Digit {d} out of range [0, {sys.D})")
    return w


def cylinder_measure(sys: DigitSystem, w: Iterable[int]) -> MeasureKey:
    """Exact product of the digit measures of ``w``; the empty word has measure 1."""
    w = _check_word(sys, w)
    return math.prod((sys.measures[d] for d in w), start=Fraction(1))


def log_measure(sys: DigitSystem, m: Sequence[int]) -> float:
    """Sum of m_d * log(lambda_d) for a count vector m."""
    m = [int(x) for x in m]
    if len(m) != sys.D:
        raise ValueError(f"Count vector has {len(m)} entries, system has {sys.D} digits")
    if any(x < 0 for x in m):
        raise NegativeCount(f"Counts must be non-negative, got {m}")
    return math.fsum(x * lg for x, lg in zip(m, sys.log_measures))


def digit_counts(sys: DigitSystem, w: Iterable[int]) -> CountVector:
    w = _check_word(sys, w)
    counts = [0] * sys.D
    for d in w:
        counts[d] += 1
    return tuple(counts)


def entropy(sys: DigitSystem) -> float:
    """-sum lambda log lambda, the mean information per digit."""
    return -math.fsum(float(m) * lg for m, lg in zip(sys.measures, sys.log_measures))


# -----------------------------
# Symbols <-> internal indices
# -----------------------------
def word_symbols(sys: DigitSystem, w: Iterable[int], sep: str | None = None) -> str:
    w = _check_word(sys, w)
    if sep is None:
        sep = "" if all(len(s) == 1 for s in sys.symbols) else " "
    return sep.join(sys.symbols[d] for d in w)


def parse_word(sys: DigitSystem, text: str) -> Word:
    """Read a word written in user symbols ("012", "a b c" or "a,b,c")."""
    index = {s: i for i, s in enumerate(sys.symbols)}
    text = text.strip()
    if any(ch in text for ch in ", "):
        parts = [p for p in text.replace(",", " ").split() if p]
    elif all(len(s) == 1 for s in sys.symbols):
        parts = list(text)
    else:
        parts = [text]

    missing = [p for p in parts if p not in index]
    if missing:
        raise DigitOutOfRange(f"Unknown digit symbols {missing}; system symbols are {list(sys.symbols)}")
    return tuple(index[p] for p in parts)
