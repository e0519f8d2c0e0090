"""Bit-string genotypes, populations and the pairwise Hamming diversity S(P).

Genotypes are stored as Python integers: position ``i`` (0-based, shown
left-to-right in text form) lives in bit ``i``.  Hamming distances then
reduce to ``int.bit_count`` of an XOR.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError


class BitString:
    """Immutable fixed-length bit string with a cached ones count."""

    __slots__ = ("n", "value", "ones")

    def __init__(self, n: int, value: int = 0):
        if n < 0:
            raise UsageError(f"length must be non-negative, got {n}")
        if value < 0 or value >> n:
            raise UsageError(f"value {value} does not fit in {n} bits")
        self.n = n
        self.value = value
        self.ones = value.bit_count()

    @classmethod
    def from_str(cls, text: str) -> BitString:
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise UsageError(f"genotype must be over {{0,1}}: {text!r}")
        value = 0
        for i, ch in enumerate(text):
            if ch == "1":
                value |= 1 << i
        return cls(len(text), value)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        bits = list(bits)
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise UsageError(f"bit at position {i} is {b!r}")
            if b:
                value |= 1 << i
        return cls(len(bits), value)

    @classmethod
    def zeros(cls, n: int) -> BitString:
        return cls(n, 0)

    @classmethod
    def all_ones(cls, n: int) -> BitString:
        return cls(n, (1 << n) - 1)

    @property
    def zeros_count(self) -> int:
        return self.n - self.ones

    @property
    def mask(self) -> int:
        return (1 << self.n) - 1

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.value >> (i % self.n)) & 1

    def __iter__(self):
        v = self.value
        for _ in range(self.n):
            yield v & 1
            v >>= 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.n == other.n and self.value == other.value

    def __hash__(self) -> int:
        return hash((self.n, self.value))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def __repr__(self) -> str:
        return f"BitString('{self}')"

    def to_array(self) -> np.ndarray:
        return np.fromiter(iter(self), dtype=np.uint8, count=self.n)

    @classmethod
    def from_array(cls, arr) -> BitString:
        return cls.from_bits(int(b) for b in np.asarray(arr).ravel())

    def flip(self, positions: Iterable[int]) -> BitString:
        v = self.value
        for p in positions:
            if not 0 <= p < self.n:
                raise UsageError(f"position {p} out of range for length {self.n}")
            v ^= 1 << p
        return BitString(self.n, v)

    def complement(self) -> BitString:
        return BitString(self.n, self.value ^ self.mask)

    def permute(self, perm: Sequence[int]) -> BitString:
        """Return y with y[perm[i]] = x[i]."""
        v = 0
        for i, b in enumerate(self):
            if b:
                v |= 1 << perm[i]
        return BitString(self.n, v)

    def one_positions(self) -> list[int]:
        return [i for i, b in enumerate(self) if b]

    def zero_positions(self) -> list[int]:
        return [i for i, b in enumerate(self) if not b]


def _check_lengths(x: BitString, y: BitString) -> None:
    if x.n != y.n:
        raise UsageError(f"length mismatch: {x.n} vs {y.n}")


def hamming(x: BitString, y: BitString) -> int:
    _check_lengths(x, y)
    return (x.value ^ y.value).bit_count()


def random_bitstring(n: int, rng: np.random.Generator) -> BitString:
    if n == 0:
        return BitString(0)
    return BitString(n, int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1))


def random_with_zeros(n: int, zeros: int, rng: np.random.Generator) -> BitString:
    """Uniform string with exactly ``zeros`` zero bits."""
    if not 0 <= zeros <= n:
        raise UsageError(f"cannot place {zeros} zeros in {n} bits")
    positions = rng.choice(n, size=zeros, replace=False)
    return BitString.all_ones(n).flip(int(p) for p in positions)


class Population:
    """Multiset of μ equal-length bit strings with cached zero counts and diversity.

    ``replace`` updates both caches in O(n) (it only touches positions where the
    incoming string and the victim differ).
    """

    def __init__(self, members: Sequence[BitString]):
        members = list(members)
        if not members:
            raise UsageError("population must be nonempty")
        n = members[0].n
        for x in members:
            if x.n != n:
                raise UsageError(f"mixed genotype lengths {n} and {x.n}")
        self.members = members
        self.n = n
        self.zero_counts = _zero_counts(members, n)
        m = self.zero_counts
        self._diversity = int(np.sum(2 * m * (self.mu - m)))

    @property
    def mu(self) -> int:
        return len(self.members)

    @property
    def diversity(self) -> int:
        return self._diversity

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> BitString:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    def __repr__(self) -> str:
        return f"Population(mu={self.mu}, n={self.n}, S={self._diversity})"

    def copy(self) -> Population:
        new = object.__new__(Population)
        new.members = list(self.members)
        new.n = self.n
        new.zero_counts = self.zero_counts.copy()
        new._diversity = self._diversity
        return new

    def contribution(self, y: BitString) -> int:
        if y.n != self.n:
            raise UsageError(f"length mismatch: {y.n} vs population length {self.n}")
        return sum((y.value ^ x.value).bit_count() for x in self.members)

    def replace_inplace(self, incoming: BitString, victim_index: int) -> None:
        if not 0 <= victim_index < self.mu:
            raise UsageError(f"victim index {victim_index} out of range for mu={self.mu}")
        if incoming.n != self.n:
            raise UsageError(f"length mismatch: {incoming.n} vs population length {self.n}")
        old = self.members[victim_index]
        diff = old.value ^ incoming.value
        mu = self.mu
        zc = self.zero_counts
        delta = 0
        while diff:
            low = diff & -diff
            i = low.bit_length() - 1
            m = int(zc[i])
            if incoming.value & low:
                # a zero leaves position i
                delta += 2 * (2 * m - mu - 1)
                zc[i] = m - 1
            else:
                delta += 2 * (mu - 2 * m - 1)
                zc[i] = m + 1
            diff ^= low
        self._diversity += delta
        self.members[victim_index] = incoming

    def to_matrix(self) -> np.ndarray:
        out = np.empty((self.mu, self.n), dtype=np.uint8)
        for r, x in enumerate(self.members):
            out[r] = x.to_array()
        return out

    @classmethod
    def from_matrix(cls, mat) -> Population:
        mat = np.asarray(mat)
        return cls([BitString.from_array(row) for row in mat])

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> Population:
        return cls([BitString.from_str(r) for r in rows])


def _zero_counts(members: Sequence[BitString], n: int) -> np.ndarray:
    counts = np.zeros(n, dtype=np.int64)
    for x in members:
        v = x.value
        for i in range(n):
            if not (v >> i) & 1:
                counts[i] += 1
    return counts


def diversity(P: Population) -> int:
    return P.diversity


def pairwise_diversity(members: Sequence[BitString]) -> int:
    """Ordered double sum of Hamming distances, computed from scratch."""
    return sum(hamming(a, b) for a in members for b in members)


def diversity_contribution(P: Population, y: BitString) -> int:
    return P.contribution(y)


def replace(P: Population, incoming: BitString, victim_index: int) -> Population:
    """Return a new population with ``incoming`` in place of the member at ``victim_index``."""
    out = P.copy()
    out.replace_inplace(incoming, victim_index)
    return out


def max_plateau_diversity(n: int, k: int, mu: int) -> int:
    """Largest S over populations of μ strings that each have exactly k zeros."""
    if not 0 <= k <= n or mu < 1:
        raise UsageError(f"need 0 <= k <= n and mu >= 1, got n={n}, k={k}, mu={mu}")
    if n == 0:
        return 0
    q, r = divmod(k * mu, n)
    return r * 2 * (q + 1) * (mu - q - 1) + (n - r) * 2 * q * (mu - q)


def random_plateau_population(n: int, k: int, mu: int, rng: np.random.Generator) -> Population:
    return Population([random_with_zeros(n, k, rng) for _ in range(mu)])


def read_population(path: str | Path) -> Population:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    return Population.from_strings(rows)


def write_population(path: str | Path, P: Population) -> None:
    Path(path).write_text("".join(f"{x}\n" for x in P.members))
