"""Exhaustive checks of operator identities on tiny genotypes."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import lcm

import numpy as np

from ..bitpop import BitString, hamming
from ..errors import UsageError
from ..variation import PairedFlip, crossover_outcomes, mutation_outcomes


def expected_distance_after(op, x: BitString, y: BitString) -> Fraction:
    """E(H(x, z)) for z = op(y), by enumerating the mutation outcomes exactly."""
    return sum((p * hamming(x, z) for z, p in mutation_outcomes(op, y)), Fraction(0))


def paired_flip_formula(n: int, k: int, ell: int, h: int) -> Fraction:
    """2 ell + (1 - ell n / (k (n - k))) h."""
    return 2 * ell + (1 - Fraction(ell * n, k * (n - k))) * h


def plateau_strings(n: int, k: int) -> list[BitString]:
    return [BitString.all_ones(n).flip(z) for z in combinations(range(n), k)]


def paired_flip_lemma_defects(n: int, k: int) -> list[tuple[int, int, Fraction, Fraction]]:
    """For every plateau pair (x, y) and ell <= min(k, n-k): (ell, H(x,y), exact E(H(x,z)), formula).

    z is the paired-flip mutant of y; the expectation is taken over all of its
    equally likely outcomes.
    """
    strings = plateau_strings(n, k)
    out = []
    q = min(k, n - k)
    for y in strings:
        for ell in range(q + 1):
            outs = mutation_outcomes(PairedFlip(ell), y)
            zs = np.array([z.value for z, _ in outs], dtype=np.int64)
            weight = outs[0][1]
            for x in strings:
                h = hamming(x, y)
                dist = _popcount(zs ^ x.value)
                exact = weight * int(dist.sum())
                out.append((ell, h, exact, paired_flip_formula(n, k, ell, h)))
    return out


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def neutrality_defects(kind: str, n: int) -> np.ndarray:
    """Scaled defect of the diversity-neutrality identity for every (x1, x2, z) of length n.

    Entry [x1, x2, z] equals D * (E H(c(x1,x2), z) + E H(c(x2,x1), z) - H(x1,z) - H(x2,z))
    for an integer common denominator D, so exact neutrality means all zeros.
    """
    if n > 8:
        raise UsageError(f"exhaustive neutrality check limited to n <= 8, got n={n}")
    size = 1 << n
    zs = np.arange(size, dtype=np.int64)
    dists = np.array([_popcount(zs ^ v) for v in range(size)])  # dists[v, z] = H(v, z)
    out = np.zeros((size, size, size), dtype=np.int64)
    for a in range(size):
        xa = BitString(n, a)
        for b in range(size):
            xb = BitString(n, b)
            fwd = crossover_outcomes(kind, xa, xb)
            bwd = crossover_outcomes(kind, xb, xa)
            denom = lcm(*(p.denominator for _, p in fwd + bwd))
            acc = np.zeros(size, dtype=np.int64)
            for y, p in fwd + bwd:
                acc += int(p * denom) * dists[y.value]
            out[a, b] = acc - denom * (dists[a] + dists[b])
    return out


def neutrality_gap(kind: str, x1: BitString, x2: BitString, z: BitString) -> Fraction:
    """E(H(c(x1,x2),z) + H(c(x2,x1),z)) - H(x1,z) - H(x2,z), exactly."""
    total = Fraction(0)
    for y, p in crossover_outcomes(kind, x1, x2) + crossover_outcomes(kind, x2, x1):
        total += p * hamming(y, z)
    return total - hamming(x1, z) - hamming(x2, z)
