"""Mutation and crossover operators on BitString.

All operators take an explicit ``numpy.random.Generator``; nothing here owns
global randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Union

import numpy as np

from .bitpop import BitString, _check_lengths, random_bitstring
from .errors import UsageError


@dataclass(frozen=True)
class StandardBit:
    """Flip each bit independently with probability chi/n."""

    chi: float = 1.0

    def __post_init__(self):
        if not self.chi > 0:
            raise UsageError(f"chi must be positive, got {self.chi}")

    def rate(self, n: int) -> float:
        if self.chi > n:
            raise UsageError(f"chi={self.chi} exceeds n={n}")
        return self.chi / n


@dataclass(frozen=True)
class PairedFlip:
    """Flip a uniform ell-subset of the ones and a uniform ell-subset of the zeros."""

    ell: int

    def __post_init__(self):
        if self.ell < 0:
            raise UsageError(f"ell must be non-negative, got {self.ell}")


@dataclass(frozen=True)
class FixedRadius:
    """Flip a uniform r-subset of all positions."""

    r: int

    def __post_init__(self):
        if self.r < 0:
            raise UsageError(f"radius must be non-negative, got {self.r}")


MutationSpec = Union[StandardBit, PairedFlip, FixedRadius]

CROSSOVERS = ("uniform", "balanced", "boring")


def mutation_to_dict(spec: MutationSpec) -> dict:
    if isinstance(spec, StandardBit):
        return {"mutation": "standard", "chi": spec.chi}
    if isinstance(spec, PairedFlip):
        return {"mutation": "paired", "ell": spec.ell}
    return {"mutation": "radius", "r": spec.r}


def _flip_subset(x: BitString, candidates: list[int], size: int, rng) -> int:
    chosen = rng.choice(len(candidates), size=size, replace=False)
    mask = 0
    for c in chosen:
        mask |= 1 << candidates[int(c)]
    return mask


def mutate(spec: MutationSpec, x: BitString, rng: np.random.Generator) -> BitString:
    n = x.n
    if isinstance(spec, StandardBit):
        p = spec.rate(n)
        flips = int(rng.binomial(n, p))
        if flips == 0:
            return x
        positions = rng.choice(n, size=flips, replace=False)
        mask = 0
        for p_ in positions:
            mask |= 1 << int(p_)
        return BitString(n, x.value ^ mask)
    if isinstance(spec, PairedFlip):
        ell = spec.ell
        if ell > min(x.ones, x.zeros_count):
            raise UsageError(f"cannot flip {ell} ones and {ell} zeros of a string with {x.ones} ones")
        if ell == 0:
            return x
        mask = _flip_subset(x, x.one_positions(), ell, rng)
        mask |= _flip_subset(x, x.zero_positions(), ell, rng)
        return BitString(n, x.value ^ mask)
    if isinstance(spec, FixedRadius):
        if spec.r > n:
            raise UsageError(f"radius {spec.r} exceeds n={n}")
        return BitString(n, x.value ^ _flip_subset(x, list(range(n)), spec.r, rng))
    raise UsageError(f"unknown mutation spec {spec!r}")


def uniform_crossover(x1: BitString, x2: BitString, rng: np.random.Generator) -> BitString:
    _check_lengths(x1, x2)
    take2 = random_bitstring(x1.n, rng).value
    return BitString(x1.n, (x1.value & ~take2) | (x2.value & take2))


def balanced_uniform_crossover(x1: BitString, x2: BitString, rng: np.random.Generator) -> BitString:
    """Copy agreeing bits; put ones on a uniform floor(d/2)-subset of the d differing positions."""
    _check_lengths(x1, x2)
    diff = x1.value ^ x2.value
    positions = [i for i in range(x1.n) if (diff >> i) & 1]
    base = x1.value & ~diff
    if not positions:
        return BitString(x1.n, base)
    return BitString(x1.n, base | _flip_subset(x1, positions, len(positions) // 2, rng))


def boring_crossover(x1: BitString, x2: BitString, rng: np.random.Generator) -> BitString:
    _check_lengths(x1, x2)
    return x1 if rng.random() < 0.5 else x2


def crossover(kind: str, x1: BitString, x2: BitString, rng: np.random.Generator) -> BitString:
    if kind == "uniform":
        return uniform_crossover(x1, x2, rng)
    if kind == "balanced":
        return balanced_uniform_crossover(x1, x2, rng)
    if kind == "boring":
        return boring_crossover(x1, x2, rng)
    raise UsageError(f"unknown crossover {kind!r}; choose from {CROSSOVERS}")


# -- exact outcome distributions (used by the enumeration oracles) ---------


def crossover_outcomes(kind: str, x1: BitString, x2: BitString) -> list[tuple[BitString, Fraction]]:
    """All offspring of a crossover operator with their exact probabilities."""
    _check_lengths(x1, x2)
    n = x1.n
    diff = x1.value ^ x2.value
    positions = [i for i in range(n) if (diff >> i) & 1]
    base = x1.value & ~diff
    d = len(positions)
    if kind == "boring":
        if x1 == x2:
            return [(x1, Fraction(1))]
        return [(x1, Fraction(1, 2)), (x2, Fraction(1, 2))]
    if kind == "uniform":
        weight = Fraction(1, 2**d)
        out = []
        for pattern in range(2**d):
            v = base
            for j, pos in enumerate(positions):
                if (pattern >> j) & 1:
                    v |= 1 << pos
            out.append((BitString(n, v), weight))
        return out
    if kind == "balanced":
        half = d // 2
        weight = Fraction(1, comb(d, half))
        out = []
        for chosen in combinations(positions, half):
            v = base
            for pos in chosen:
                v |= 1 << pos
            out.append((BitString(n, v), weight))
        return out
    raise UsageError(f"unknown crossover {kind!r}; choose from {CROSSOVERS}")


def mutation_outcomes(spec: MutationSpec, x: BitString, max_outcomes: int = 10**7) -> list[tuple[BitString, Fraction]]:
    """Exact mutation distribution. StandardBit requires a rational-representable chi."""
    n = x.n
    if isinstance(spec, PairedFlip):
        ell = spec.ell
        if ell > min(x.ones, x.zeros_count):
            raise UsageError(f"cannot flip {ell} ones and {ell} zeros of a string with {x.ones} ones")
        ones, zeros = x.one_positions(), x.zero_positions()
        total = comb(len(ones), ell) * comb(len(zeros), ell)
        if total > max_outcomes:
            raise UsageError(f"{total} outcomes exceed the enumeration limit {max_outcomes}")
        weight = Fraction(1, total)
        out = []
        for a in combinations(ones, ell):
            for b in combinations(zeros, ell):
                out.append((x.flip(a + b), weight))
        return out
    if isinstance(spec, FixedRadius):
        total = comb(n, spec.r)
        if total > max_outcomes:
            raise UsageError(f"{total} outcomes exceed the enumeration limit {max_outcomes}")
        weight = Fraction(1, total)
        return [(x.flip(c), weight) for c in combinations(range(n), spec.r)]
    if isinstance(spec, StandardBit):
        if 2**n > max_outcomes:
            raise UsageError(f"2^{n} outcomes exceed the enumeration limit {max_outcomes}")
        p = Fraction(spec.chi).limit_denominator(10**9) / n
        out = []
        for mask in range(2**n):
            f = mask.bit_count()
            out.append((BitString(n, x.value ^ mask), p**f * (1 - p) ** (n - f)))
        return out
    raise UsageError(f"unknown mutation spec {spec!r}")
