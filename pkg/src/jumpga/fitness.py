"""Unitation benchmark functions: OneMax, Jump, Jump', JumpOffset and Hurdle.

Every family depends on the number of ones only.  Values are returned as
scaled integers so that comparisons are exact: the scale is 1 for all Jump
variants and OneMax, and w for Hurdle, where

    scaled Hurdle(x) = -(ceil(z/w) * w + z mod w),   z = number of zeros

equals w times the rational value -ceil(z/w) - (z mod w)/w.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .bitpop import BitString
from .errors import UsageError

FAMILIES = ("onemax", "jump", "jumpprime", "jumpoffset", "hurdle")
JUMP_FAMILIES = ("jump", "jumpprime", "jumpoffset")

_ALIASES = {
    "onemax": "onemax",
    "jump": "jump",
    "jumpprime": "jumpprime",
    "jump'": "jumpprime",
    "jump_prime": "jumpprime",
    "jumpoffset": "jumpoffset",
    "jump_offset": "jumpoffset",
    "hurdle": "hurdle",
}


@dataclass(frozen=True)
class FitnessSpec:
    family: str
    n: int
    k: Optional[int] = None
    delta: Optional[int] = None
    w: Optional[int] = None

    def __post_init__(self):
        fam = _ALIASES.get(str(self.family).lower())
        if fam is None:
            raise UsageError(f"unknown fitness family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if self.n < 1:
            raise UsageError(f"n must be positive, got {self.n}")
        if fam in JUMP_FAMILIES:
            if self.k is None or not 1 <= self.k <= self.n:
                raise UsageError(f"{fam} needs 1 <= k <= n, got k={self.k}, n={self.n}")
        if fam == "jumpoffset":
            if self.delta is None or not 1 <= self.delta <= self.k:
                raise UsageError(f"jumpoffset needs 1 <= delta <= k, got delta={self.delta}")
        if fam == "hurdle":
            if self.w is None or not 1 <= self.w <= self.n:
                raise UsageError(f"hurdle needs 1 <= w <= n, got w={self.w}")

    @property
    def scale(self) -> int:
        return self.w if self.family == "hurdle" else 1

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def value_at(spec: FitnessSpec, ones: int) -> int:
    """Scaled fitness of any string with ``ones`` one-bits."""
    n = spec.n
    fam = spec.family
    if fam == "onemax":
        return ones
    if fam in ("jump", "jumpprime"):
        if ones == n:
            return 0 if fam == "jumpprime" else n + spec.k
        if ones <= n - spec.k:
            return ones + spec.k
        return n - ones
    if fam == "jumpoffset":
        if ones <= n - spec.k or ones >= n - spec.k + spec.delta:
            return ones
        return -ones
    z = n - ones
    w = spec.w
    return -(math.ceil(z / w) * w + z % w) if z else 0


def fitness_table(spec: FitnessSpec) -> np.ndarray:
    """Scaled fitness for every ones count 0..n."""
    return np.array([value_at(spec, o) for o in range(spec.n + 1)], dtype=np.int64)


def evaluate(spec: FitnessSpec, x: BitString) -> int:
    if x.n != spec.n:
        raise UsageError(f"length mismatch: genotype {x.n}, fitness n={spec.n}")
    return value_at(spec, x.ones)


def evaluate_exact(spec: FitnessSpec, x: BitString) -> Fraction:
    return Fraction(evaluate(spec, x), spec.scale)


def optimum_ones(spec: FitnessSpec) -> Optional[int]:
    """Ones count of the global optimum, or None when 1^n is not optimal (Jump')."""
    return None if spec.family == "jumpprime" else spec.n


def plateau_ones(spec: FitnessSpec) -> Optional[int]:
    """Ones count of the plateau; OneMax is treated as k=0, so its plateau is {1^n}."""
    if spec.family in JUMP_FAMILIES:
        return spec.n - spec.k
    if spec.family == "onemax":
        return spec.n
    return None


def is_on_plateau(spec: FitnessSpec, x: BitString) -> bool:
    if spec.family not in JUMP_FAMILIES:
        raise UsageError(f"plateau is defined for Jump families only, not {spec.family}")
    if x.n != spec.n:
        raise UsageError(f"length mismatch: genotype {x.n}, fitness n={spec.n}")
    return x.ones == spec.n - spec.k


def hurdle_local_optimum_level(spec: FitnessSpec, x: BitString) -> Optional[int]:
    """Return i when x has exactly i*w zeros, otherwise None."""
    if spec.family != "hurdle":
        raise UsageError(f"hurdle levels need a hurdle spec, not {spec.family}")
    if x.n != spec.n:
        raise UsageError(f"length mismatch: genotype {x.n}, fitness n={spec.n}")
    level, rem = divmod(x.zeros_count, spec.w)
    return level if rem == 0 else None
