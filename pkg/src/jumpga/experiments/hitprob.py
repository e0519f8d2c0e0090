"""Probabilities of reaching 1^n (or a fitness gain) from one crossover of two plateau parents."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Optional

import numpy as np

from ..bitpop import BitString, _check_lengths, hamming
from ..errors import UsageError

CHUNK = 1 << 18


def exact_opt_hit(x1: BitString, x2: BitString, chi: float | Fraction, max_d: int = 20) -> float:
    """Exact probability that standard bit mutation of uniform_crossover(x1, x2) equals 1^n.

    Sums over all 2^d equally likely crossover outcomes y the probability
    (chi/n)^zeros(y) (1 - chi/n)^(n - zeros(y)) that mutation flips exactly the zeros of y.
    """
    _check_lengths(x1, x2)
    n = x1.n
    diff = x1.value ^ x2.value
    d = diff.bit_count()
    if d > max_d:
        raise UsageError(f"{d} differing positions exceed the enumeration limit {max_d}")
    base_zeros = n - (x1.value & x2.value).bit_count() - d
    p = Fraction(chi).limit_denominator(10**12) / n
    total = Fraction(0)
    for pattern in range(2**d):
        z = base_zeros + d - pattern.bit_count()
        total += p**z * (1 - p) ** (n - z)
    return float(total / 2**d)


def mc_opt_hit(x1: BitString, x2: BitString, chi: float, N: int, rng: np.random.Generator) -> tuple[float, float]:
    """Fraction of N literal crossover+mutation samples equal to 1^n, with its binomial standard error."""
    _check_lengths(x1, x2)
    n = x1.n
    a, b = x1.to_array().astype(bool), x2.to_array().astype(bool)
    p = chi / n
    hits = 0
    left = N
    while left:
        m = min(CHUNK, left)
        take2 = rng.random((m, n)) < 0.5
        y = np.where(take2, b, a)
        y ^= rng.random((m, n)) < p
        hits += int(np.count_nonzero(y.all(axis=1)))
        left -= m
    est = hits / N
    return est, math.sqrt(max(est * (1 - est), 1.0 / N) / N)


def mc_jump_offset_success(k: int, delta: int, N: int, rng: np.random.Generator,
                           n: Optional[int] = None) -> tuple[float, float]:
    """Fraction of uniform crossovers of two complementary plateau parents with >= n-k+delta ones."""
    n = 2 * k if n is None else n
    if n < 2 * k or not 1 <= delta <= k:
        raise UsageError(f"need n >= 2k and 1 <= delta <= k, got n={n}, k={k}, delta={delta}")
    x1 = np.ones(n, dtype=bool)
    x2 = np.ones(n, dtype=bool)
    x1[:k] = False
    x2[k:2 * k] = False
    need = n - k + delta
    hits = 0
    left = N
    while left:
        m = min(CHUNK, left)
        y = np.where(rng.random((m, n)) < 0.5, x2, x1)
        hits += int(np.count_nonzero(y.sum(axis=1) >= need))
        left -= m
    est = hits / N
    return est, math.sqrt(max(est * (1 - est), 1.0 / N) / N)


def complementary_pair(n: int, k: int) -> tuple[BitString, BitString]:
    """Two plateau strings whose k zeros occupy disjoint positions."""
    if n < 2 * k:
        raise UsageError(f"a complementary pair needs n >= 2k, got n={n}, k={k}")
    x1 = BitString.from_str("0" * k + "1" * (n - k))
    x2 = BitString.from_str("1" * k + "0" * k + "1" * (n - 2 * k))
    return x1, x2


def plateau_pairs(n: int, k: int, canonical: bool = True) -> Iterator[tuple[BitString, BitString]]:
    """Plateau parent pairs.

    With ``canonical`` the first parent is fixed to 0^k 1^(n-k); every pair is
    a simultaneous position permutation of one of these, and the hit
    probability is permutation invariant, so this covers all pairs.
    """
    strings = []
    for zeros in combinations(range(n), k):
        strings.append(BitString.all_ones(n).flip(zeros))
    firsts = strings[:1] if canonical else strings
    for a in firsts:
        for b in strings:
            yield a, b


def half_distance(x1: BitString, x2: BitString) -> int:
    h = hamming(x1, x2)
    if h % 2:
        raise UsageError("plateau parents have even Hamming distance")
    return h // 2
