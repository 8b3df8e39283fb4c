from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.fibred_system.digit_system import Word


@dataclass(frozen=True)
class BlockCensus:
    N: int
    k: int
    counts: dict[Word, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, w: Sequence[int]) -> int:
        return self.counts.get(tuple(w), 0)


def block_counts(prefix: Sequence[int], k: int) -> BlockCensus:
    """
    Sliding-window counts of every k-block of ``prefix``.

    Windows start at positions 0..N-k, so the counts sum to N-k+1 (and the
    census is empty when N < k).  Each window is encoded as a base-b integer,
    b = max digit + 1, and counted with np.unique.
    """
    if k < 1:
        raise ValueError(f"Block length must be >= 1, got {k}")

    digits = np.asarray(prefix, dtype=np.int64)
    N = int(digits.size)
    if N < k:
        return BlockCensus(N=N, k=k, counts={})

    base = int(digits.max()) + 1
    n_windows = N - k + 1
    if base ** k >= 2**62:
        # codes would overflow int64; fall back to tuple keys
        counts: dict[Word, int] = {}
        for i in range(n_windows):
            key = tuple(int(d) for d in digits[i:i + k])
            counts[key] = counts.get(key, 0) + 1
        return BlockCensus(N=N, k=k, counts=counts)

    codes = np.zeros(n_windows, dtype=np.int64)
    for i in range(k):
        codes = codes * base + digits[i:i + n_windows]

    uniq, freq = np.unique(codes, return_counts=True)
    counts = {}
    for code, c in zip(uniq.tolist(), freq.tolist()):
        w = []
        for _ in range(k):
            code, d = divmod(code, base)
            w.append(d)
        counts[tuple(reversed(w))] = int(c)
    return BlockCensus(N=N, k=k, counts=counts)
