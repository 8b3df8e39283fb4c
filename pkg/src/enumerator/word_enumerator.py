from __future__ import annotations

import heapq
import itertools
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from src.config.run_config import RUN_CONFIG
from src.fibred_system.digit_system import DigitSystem, MeasureKey, Word

TIE_BREAKS = ("length-lex", "lex", "length-revlex")


def _entry(key: int, w: Word, tie_break: str) -> tuple:
    # heapq pops the smallest entry: larger measure first, then the tie-break;
    # the word itself is always the last field
    if tie_break == "length-lex":
        return (-key, len(w), w)
    if tie_break == "lex":
        return (-key, w)
    if tie_break == "length-revlex":
        return (-key, len(w), tuple(-d for d in w), w)
    raise ValueError(f"Unknown tie-break {tie_break!r}; expected one of {TIE_BREAKS}")


class WordEnumerator:
    """
    Best-first enumeration of all non-empty words by non-increasing measure.

    Digits are chained in the order the tie-break ranks one-digit extensions
    of a common prefix (decreasing measure first). A popped word w.d pushes
    its next sibling w.d' (d' follows d in the chain) and its first child
    w.d.c0. Each word has exactly one such predecessor and never precedes
    it, so each word enters the frontier once and the frontier grows by at
    most one entry per pop.

    Heap keys are plain integers: measure * q**scale, with q the common
    denominator of the digit measures and scale >= the longest word in the
    frontier. Raising the scale multiplies every key by q, which keeps the
    heap order, so it happens in place once per new word length.

    Not safe for concurrent use; create one enumerator per consumer.
    """

    def __init__(self, sys: DigitSystem, tie_break: str = RUN_CONFIG["tie_break"],
                 max_length: int | None = None):
        if tie_break not in TIE_BREAKS:
            raise ValueError(f"Unknown tie-break {tie_break!r}; expected one of {TIE_BREAKS}")
        self.sys = sys
        self.tie_break = tie_break
        self.max_length = max_length
        self.emitted_count = 0
        self.emitted_digit_total = 0
        self._q = sys.common_denominator
        self._nums = sys.scaled_numerators
        sign = -1 if tie_break == "length-revlex" else 1
        self._chain = sorted(range(sys.D), key=lambda d: (-sys.measures[d], sign * d))
        self._next = {a: b for a, b in zip(self._chain, self._chain[1:])}
        self._scale = 1
        self._den = self._q
        first = self._chain[0]
        self.frontier: list[tuple] = [_entry(self._nums[first], (first,), tie_break)]
        self.frontier_high_water = 1

    def _raise_scale(self) -> None:
        q = self._q
        self.frontier = [(entry[0] * q,) + entry[1:] for entry in self.frontier]
        self._scale += 1
        self._den *= q

    def pop_scaled(self) -> tuple[Word, int, int]:
        """Next word with its measure as (numerator, denominator), not reduced."""
        entry = heapq.heappop(self.frontier)
        w, key = entry[-1], -entry[0]
        nums, tie_break, frontier = self._nums, self.tie_break, self.frontier

        last = w[-1]
        sibling = self._next.get(last)
        if sibling is not None:
            heapq.heappush(frontier, _entry(key // nums[last] * nums[sibling], w[:-1] + (sibling,), tie_break))

        if self.max_length is None or len(w) < self.max_length:
            if len(w) == self._scale:
                self._raise_scale()
                frontier = self.frontier
                key *= self._q
            first = self._chain[0]
            heapq.heappush(frontier, _entry(key * nums[first] // self._q, w + (first,), tie_break))

        if len(frontier) > self.frontier_high_water:
            self.frontier_high_water = len(frontier)
        self.emitted_count += 1
        self.emitted_digit_total += len(w)
        return w, key, self._den

    def peek_measure(self) -> MeasureKey | None:
        return Fraction(-self.frontier[0][0], self._den) if self.frontier else None

    def pop(self) -> tuple[Word, MeasureKey]:
        w, num, den = self.pop_scaled()
        return w, Fraction(num, den)

    def __iter__(self) -> Iterator[tuple[Word, MeasureKey]]:
        while self.frontier:
            yield self.pop()

    def iter_words(self) -> Iterator[Word]:
        """Words only; skips building the exact measures."""
        while self.frontier:
            yield self.pop_scaled()[0]


def enumerate_prefix(sys: DigitSystem, n: int, tie_break: str = RUN_CONFIG["tie_break"]) -> list[Word]:
    """First n words s_1, ..., s_n of the enumeration."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return list(itertools.islice(WordEnumerator(sys, tie_break).iter_words(), n))


def iter_words_with_offsets(sys: DigitSystem, tie_break: str = RUN_CONFIG["tie_break"]):
    """Yield (word, 0-based start offset of the word in x_S, measure)."""
    offset = 0
    for w, m in WordEnumerator(sys, tie_break):
        yield w, offset, m
        offset += len(w)


def digit_stream(sys: DigitSystem, tie_break: str = RUN_CONFIG["tie_break"]) -> Iterator[int]:
    """
    Lazily yield the digits d_1, d_2, ... of x_S (internal indices).

    Each call starts a fresh enumeration, so the stream is restartable.
    """
    for w in WordEnumerator(sys, tie_break).iter_words():
        yield from w


def prefix_with_epsilons(
    sys: DigitSystem,
    n: int,
    Ns: Sequence[int] = (),
    tie_break: str = RUN_CONFIG["tie_break"],
) -> tuple[np.ndarray, list[MeasureKey]]:
    """
    The first n digits of x_S and eps(N) for every N in Ns, in one pass.

    Every N must lie in 1..n.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    Ns = [int(N) for N in Ns]
    if any(N < 1 or N > n for N in Ns):
        raise ValueError(f"Digit positions must lie in 1..{n}, got {Ns}")

    targets = sorted(set(Ns))
    found: dict[int, MeasureKey] = {}
    i = 0
    digits: list[int] = []
    enum = WordEnumerator(sys, tie_break)
    while len(digits) < n:
        w, num, den = enum.pop_scaled()
        digits.extend(w)
        while i < len(targets) and len(digits) >= targets[i]:
            found[targets[i]] = Fraction(num, den)
            i += 1
    return np.asarray(digits[:n], dtype=np.int64), [found[N] for N in Ns]


def digit_prefix(sys: DigitSystem, n: int, tie_break: str = RUN_CONFIG["tie_break"]) -> np.ndarray:
    """The first n digits of x_S as an integer array."""
    return prefix_with_epsilons(sys, n, (), tie_break)[0]


def epsilon_at(sys: DigitSystem, N: int, tie_break: str = RUN_CONFIG["tie_break"]) -> MeasureKey:
    """eps(N): measure of the enumerated word that contains digit N (1-based)."""
    if N < 1:
        raise ValueError(f"Digit positions are 1-based, got N={N}")
    return epsilons_at(sys, [N], tie_break)[0]


def epsilons_at(sys: DigitSystem, Ns, tie_break: str = RUN_CONFIG["tie_break"]) -> list[MeasureKey]:
    """eps(N) for every N of a list, in one pass over the enumeration."""
    Ns = [int(n) for n in Ns]
    if any(n < 1 for n in Ns):
        raise ValueError(f"Digit positions are 1-based, got {Ns}")
    return prefix_with_epsilons(sys, max(Ns, default=0), Ns, tie_break)[1]
