from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from src.config.run_config import RUN_CONFIG
from src.fibred_system.config_io import check_epsilon, format_rational
from src.fibred_system.digit_system import DigitSystem, _check_word, cylinder_measure
from src.enumerator.word_enumerator import prefix_with_epsilons


@dataclass(frozen=True)
class ACounts:
    a_total: int                 # A(eps): digits in all words with measure >= eps
    a_sharp: int                 # A#(eps): number of such words
    a_for_s: int | None = None   # A(eps; s): occurrences of s inside those words


def count_occurrences(w: Sequence[int], s: Sequence[int]) -> int:
    """Occurrences of s as a contiguous block of w, overlaps included."""
    k = len(s)
    if k == 0 or k > len(w):
        return 0
    s = tuple(s)
    first = s[0]
    return sum(1 for i in range(len(w) - k + 1) if w[i] == first and tuple(w[i:i + k]) == s)


def _walk_above(sys: DigitSystem, eps, blocks: list[tuple[int, ...]]) -> tuple[int, int, list[int]]:
    """
    Depth-first walk of every non-empty word with measure >= eps.

    Measures are integer numerators over powers of the common denominator q,
    so the threshold test num * eps.den >= eps.num * q^len is exact. Each
    word carries its occurrence count per block: a child's count is its
    parent's plus one when the child ends with the block.
    """
    q = sys.common_denominator
    nums = sys.scaled_numerators
    ks = [len(b) for b in blocks]
    e_num, e_den = eps.numerator, eps.denominator

    a_total = a_sharp = 0
    totals = [0] * len(blocks)
    # stack holds (word, numerator, q^len, occurrences per block)
    stack: list[tuple] = [((), 1, 1, (0,) * len(blocks))]
    while stack:
        w, num, den, occ = stack.pop()
        cden = den * q
        for d in range(sys.D):
            cnum = num * nums[d]
            # digits are sorted by decreasing measure
            if cnum * e_den < e_num * cden:
                break
            child = w + (d,)
            a_total += len(child)
            a_sharp += 1
            if blocks:
                occ_child = tuple(o + (child[-k:] == b) for o, k, b in zip(occ, ks, blocks))
                for i, o in enumerate(occ_child):
                    totals[i] += o
            else:
                occ_child = occ
            stack.append((child, cnum, cden, occ_child))
    return a_total, a_sharp, totals


def threshold_counts(sys: DigitSystem, eps, s: Sequence[int] | None = None) -> ACounts:
    """
    A(eps), A#(eps) and optionally A(eps; s) over the words with measure >= eps.

    Parameters
    ----------
    sys : DigitSystem
    eps : rational in (0, 1]
    s : word, optional
        Query block; occurrences inside each enumerated word are counted
        with overlaps.
    """
    eps = check_epsilon(eps)
    blocks = [_check_word(sys, s)] if s is not None else []
    a_total, a_sharp, totals = _walk_above(sys, eps, blocks)
    return ACounts(a_total=a_total, a_sharp=a_sharp, a_for_s=totals[0] if s is not None else None)


def block_occurrences(sys: DigitSystem, eps, blocks: Sequence[Sequence[int]]) -> list[int]:
    """A(eps; s) for several blocks s in one walk over the words of measure >= eps."""
    eps = check_epsilon(eps)
    blocks = [_check_word(sys, b) for b in blocks]
    if any(len(b) == 0 for b in blocks):
        raise ValueError("Query blocks must be non-empty")
    return _walk_above(sys, eps, blocks)[2]


def counting_bound(sys: DigitSystem, N: int, s: Sequence[int],
                   tie_break: str = RUN_CONFIG["tie_break"]) -> dict:
    """
    Compare the observed count of s in the first N digits with the bound
    (A(eps; s) + k A#(eps)) / A(2 eps), eps = eps(N).

    Every window ending at or before digit N lies inside the words of
    measure >= eps(N) (within one word or across a boundary), and N >= A(2 eps)
    because all words of measure >= 2 eps precede the word holding digit N.
    """
    s = _check_word(sys, s)
    k = len(s)
    if k == 0:
        raise ValueError("Query word must be non-empty")
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")

    digits, (eps,) = prefix_with_epsilons(sys, N, [N], tie_break)
    observed = count_occurrences(digits.tolist(), s)
    row = {
        "N": N,
        "word": s,
        "eps_N": format_rational(eps),
        "lambda_s": float(cylinder_measure(sys, s)),
        "observed_freq": observed / N,
        "bound": None,
    }
    if 2 * eps <= 1:
        upper = threshold_counts(sys, eps, s)
        lower = threshold_counts(sys, 2 * eps)
        if lower.a_total > 0:
            row["bound"] = (upper.a_for_s + k * upper.a_sharp) / lower.a_total
    return row
