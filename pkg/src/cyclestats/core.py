"""Domain types shared by every other module.

Exact quantities are carried as :class:`fractions.Fraction`; floats only
show up at presentation boundaries and in the asymptotic layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Context, Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

Rational = Fraction

GAMMA = 0.57721566490153286
# exponent governing the decay of the fixed-set probability i(n, k)
E_EXPONENT = 1.0 - (1.0 + math.log(math.log(2.0))) / math.log(2.0)


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


class HypothesisError(DomainError):
    """A theorem bound was requested outside its hypotheses."""


@dataclass(frozen=True)
class Constants:
    gamma: float = GAMMA
    E_exponent: float = E_EXPONENT


CONSTANTS = Constants()


@dataclass(frozen=True)
class CycleType:
    """Multiplicity vector ``mult[j-1] = m_j`` of a permutation of ``[n]``."""

    n: int
    mult: tuple[int, ...]

    def __post_init__(self):
        mult = tuple(int(m) for m in self.mult)
        if self.n < 1:
            raise DomainError(f"degree must be positive, got n={self.n}")
        if len(mult) > self.n:
            if any(mult[self.n:]):
                raise DomainError("cycle lengths exceed the degree")
            mult = mult[: self.n]
        mult = mult + (0,) * (self.n - len(mult))
        if any(m < 0 for m in mult):
            raise DomainError("multiplicities must be nonnegative")
        size = sum(j * m for j, m in enumerate(mult, start=1))
        if size != self.n:
            raise DomainError(f"sum of j*m_j is {size}, expected {self.n}")
        object.__setattr__(self, "mult", mult)

    @classmethod
    def from_lengths(cls, lengths: Iterable[int], n: int | None = None) -> "CycleType":
        lengths = [int(x) for x in lengths if x]
        if n is None:
            n = sum(lengths)
        mult = [0] * n
        for length in lengths:
            if length < 1 or length > n:
                raise DomainError(f"bad cycle length {length} for n={n}")
            mult[length - 1] += 1
        return cls(n, tuple(mult))

    def count(self, j: int) -> int:
        """C_j: number of cycles of length ``j``."""
        return self.mult[j - 1] if 1 <= j <= self.n else 0

    def count_in(self, members: Iterable[int]) -> int:
        """C_I: number of cycles whose length lies in ``members``."""
        if isinstance(members, IndexSet):
            members = members.members
        return sum(self.count(j) for j in members)

    @property
    def total(self) -> int:
        """C: total number of cycles."""
        return sum(self.mult)

    def lengths(self) -> list[int]:
        """Cycle lengths in increasing order (with repetition)."""
        out = []
        for j, m in enumerate(self.mult, start=1):
            out.extend([j] * m)
        return out

    def __str__(self):
        return ",".join(str(m) for m in self.mult)


@dataclass(frozen=True)
class IndexSet:
    """A subset of ``[n]``; the sets C_I counts cycle lengths against."""

    n: int
    members: tuple[int, ...]
    _lookup: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(sorted(int(j) for j in self.members))
        if len(set(members)) != len(members):
            raise DomainError("index set has duplicate members")
        if members and (members[0] < 1 or members[-1] > self.n):
            raise DomainError(f"index set members must lie in [1, {self.n}]")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_lookup", frozenset(members))

    @classmethod
    def interval(cls, n: int, a: int, b: int) -> "IndexSet":
        return cls(n, tuple(range(max(a, 1), min(b, n) + 1)))

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(n, tuple(range(1, n + 1)))

    @classmethod
    def parse(cls, n: int, text: str) -> "IndexSet":
        """Parse comma lists and ranges, e.g. ``"1-5,8"``."""
        return cls(n, tuple(parse_int_set(text)))

    def __contains__(self, j) -> bool:
        return j in self._lookup

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def complement(self) -> "IndexSet":
        own = self._lookup
        return IndexSet(self.n, tuple(j for j in range(1, self.n + 1) if j not in own))

    def restrict(self, n: int) -> "IndexSet":
        return IndexSet(n, tuple(j for j in self.members if j <= n))

    @property
    def mass(self) -> Fraction:
        return harmonic_mass(self)

    def __str__(self):
        return format_int_set(self.members)


def parse_int_set(text: str) -> list[int]:
    out: list[int] = []
    text = text.strip()
    if not text:
        return out
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            raise DomainError(f"malformed set syntax: {text!r}")
        lo, sep, hi = piece.partition("-")
        try:
            if sep:
                a, b = int(lo), int(hi)
                if b < a:
                    raise DomainError(f"empty range {piece!r}")
                out.extend(range(a, b + 1))
            else:
                out.append(int(piece))
        except ValueError as exc:
            raise DomainError(f"malformed set syntax: {text!r}") from exc
    return out


def format_int_set(members: Sequence[int]) -> str:
    """Inverse of :func:`parse_int_set`, compressing runs into ranges."""
    parts = []
    members = sorted(members)
    i = 0
    while i < len(members):
        j = i
        while j + 1 < len(members) and members[j + 1] == members[j] + 1:
            j += 1
        if j > i:
            parts.append(f"{members[i]}-{members[j]}")
        else:
            parts.append(str(members[i]))
        i = j + 1
    return ",".join(parts)


@lru_cache(maxsize=None)
def _harmonic(n: int) -> Fraction:
    total = Fraction(0)
    for i in range(1, n + 1):
        total += Fraction(1, i)
    return total


def harmonic(n: int) -> Fraction:
    """Exact harmonic number H_n."""
    if n < 1:
        raise DomainError(f"harmonic number needs n >= 1, got {n}")
    return _harmonic(n)


def harmonic_mass(index_set: IndexSet | Iterable[int]) -> Fraction:
    """Exact H(I) = sum of 1/j over j in I; the empty set has mass 0."""
    members = index_set.members if isinstance(index_set, IndexSet) else index_set
    total = Fraction(0)
    for j in members:
        total += Fraction(1, j)
    return total


def harmonic_mass_float(index_set: IndexSet | Iterable[int]) -> float:
    """H(I) in floating point; for sets too large for exact summation."""
    members = index_set.members if isinstance(index_set, IndexSet) else index_set
    return math.fsum(1.0 / j for j in members)


@dataclass(frozen=True)
class Pmf:
    """Finitely supported law on ``offset, offset + 1, ...``."""

    offset: int
    weights: tuple
    exact: bool = True

    def __post_init__(self):
        weights = tuple(self.weights)
        object.__setattr__(self, "weights", weights)
        if any(w < 0 for w in weights):
            raise DomainError("pmf weights must be nonnegative")
        total = sum(weights)
        if self.exact:
            if total != 1:
                raise DomainError(f"exact pmf weights sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise DomainError(f"pmf weights sum to {total!r}")

    def __getitem__(self, k: int):
        i = k - self.offset
        if 0 <= i < len(self.weights):
            return self.weights[i]
        return Fraction(0) if self.exact else 0.0

    def items(self):
        return [(self.offset + i, w) for i, w in enumerate(self.weights)]

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + len(self.weights))

    def cdf(self, k):
        """P(X <= k) for real ``k``."""
        total = Fraction(0) if self.exact else 0.0
        for x, w in self.items():
            if x <= k:
                total += w
        return total

    def mean(self):
        return sum(x * w for x, w in self.items())

    def to_float(self) -> "Pmf":
        return Pmf(self.offset, tuple(float(w) for w in self.weights), exact=False)


_DEC15 = Context(prec=15, rounding=ROUND_HALF_EVEN)


def decimal15(x) -> Decimal:
    """Round a Fraction (or number) to 15 significant digits."""
    x = Fraction(x)
    if x == 0:
        return Decimal(0)
    return _DEC15.divide(Decimal(x.numerator), Decimal(x.denominator))


def rational_str(x: Fraction) -> str:
    """Canonical ``"p/q"`` rendering (q > 0, reduced)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
