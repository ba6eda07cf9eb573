"""Exact laws of cycle counts of a uniform random permutation.

Everything here returns :class:`fractions.Fraction` (or an exact
:class:`~cyclestats.core.Pmf`).  Two independent engines are kept:

* cycle-type enumeration with Cauchy weights (``joint_law``), used by
  ``joint_pmf``, ``binomial_moment`` and the partition-mode oracle;
* the marked-element recursion (``cycle_count_law``): the cycle through
  a fixed point has length ``h`` in ``(n-1)!/(n-h)!`` ways.  It is much
  faster and backs the single-set helpers and the bound harness.

The test suite checks each against the other and against element-mode
enumeration of all of S_n.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

from .core import (
    CycleType,
    DomainError,
    IndexSet,
    Pmf,
    harmonic,
    harmonic_mass,
)

log = logging.getLogger(__name__)

PARTITION_HARD_CAP = 120
DEFAULT_PARTITION_CAP = 60
ELEMENT_MODE_CAP = 9
PARTITION_MODE_CAP = 14

_partition_cap = DEFAULT_PARTITION_CAP


def set_partition_cap(n: int) -> None:
    """Override the degree cap for partition enumeration.

    Above n = 100 the partition count passes 10**8 and exact enumeration
    takes hours; a warning is logged.  The hard limit is 120.
    """
    global _partition_cap
    if not 1 <= n <= PARTITION_HARD_CAP:
        raise DomainError(f"partition cap must lie in [1, {PARTITION_HARD_CAP}]")
    if n > 100:
        log.warning("partition cap %d: enumeration cost grows like p(n) > 10**8", n)
    _partition_cap = n


def partition_cap() -> int:
    return _partition_cap


def _check_cap(n: int) -> None:
    if n > _partition_cap:
        raise DomainError(
            f"n={n} exceeds the exact partition cap {_partition_cap} (see --exact-cap)"
        )


@dataclass(frozen=True)
class JointSpec:
    """Disjoint index sets I_1..I_r of [n] with target counts m_1..m_r."""

    n: int
    sets: tuple
    counts: tuple

    def __post_init__(self):
        sets = tuple(
            s if isinstance(s, IndexSet) else IndexSet(self.n, tuple(s)) for s in self.sets
        )
        counts = tuple(int(c) for c in self.counts)
        if not sets:
            raise DomainError("need at least one index set")
        if len(sets) != len(counts):
            raise DomainError("sets and counts differ in length")
        if any(s.n != self.n for s in sets):
            raise DomainError("index sets must live in [n]")
        if any(c < 0 for c in counts):
            raise DomainError("counts must be nonnegative")
        seen: set[int] = set()
        for s in sets:
            if seen.intersection(s.members):
                raise DomainError("index sets must be pairwise disjoint")
            seen.update(s.members)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "counts", counts)


# -- cycle types --------------------------------------------------------------


def iter_cycle_types(n: int) -> Iterator[CycleType]:
    """All cycle types of degree ``n``.

    Generated recursively, largest part first with its multiplicity
    descending, so the order is fixed across runs.
    """
    _check_cap(n)
    for mult in _iter_mult(n):
        yield CycleType(n, mult)


def _iter_mult(n: int) -> Iterator[tuple]:
    mult = [0] * n

    def rec(remaining, largest):
        if remaining == 0:
            yield tuple(mult)
            return
        for j in range(min(remaining, largest), 0, -1):
            for m in range(remaining // j, 0, -1):
                mult[j - 1] = m
                yield from rec(remaining - j * m, j - 1)
            mult[j - 1] = 0

    if n == 0:
        yield ()
        return
    yield from rec(n, n)


def _centralizer(mult: Sequence[int]) -> int:
    z = 1
    for j, m in enumerate(mult, start=1):
        if m:
            z *= j**m * math.factorial(m)
    return z


def class_size(t: CycleType) -> int:
    """Number of permutations of [n] with cycle type ``t``."""
    return math.factorial(t.n) // _centralizer(t.mult)


def cauchy_pmf(t: CycleType) -> Fraction:
    """P(cycle type = t) = prod_j (1/j)^{m_j} / m_j!."""
    return Fraction(1, _centralizer(t.mult))


@lru_cache(maxsize=64)
def _type_table(n: int) -> tuple:
    return tuple((mult, math.factorial(n) // _centralizer(mult)) for mult in _iter_mult(n))


def _sets_key(n: int, sets: Iterable) -> tuple:
    key = []
    for s in sets:
        members = s.members if isinstance(s, IndexSet) else tuple(sorted(set(s)))
        key.append(tuple(j for j in members if j <= n))
    return tuple(key)


def joint_law(n: int, sets: Sequence) -> dict:
    """Exact law of (C_{I_1}, ..., C_{I_r}) by cycle-type enumeration."""
    _check_cap(n)
    return dict(_joint_law(n, _sets_key(n, sets)))


@lru_cache(maxsize=4096)
def _joint_law(n: int, key: tuple) -> tuple:
    counts: dict = defaultdict(int)
    for mult, size in _type_table(n):
        c = tuple(sum(mult[j - 1] for j in members) for members in key)
        counts[c] += size
    nfact = math.factorial(n)
    return tuple(sorted((c, Fraction(v, nfact)) for c, v in counts.items()))


def joint_pmf(spec: JointSpec) -> Fraction:
    """P(C_{I_1} = m_1, ..., C_{I_r} = m_r)."""
    law = joint_law(spec.n, spec.sets)
    return law.get(spec.counts, Fraction(0))


def marked_cycle_pmf(spec: JointSpec) -> Fraction:
    """The same probability through the marked-cycle identity.

    n P(...) = sum over t in T and h in I_t of the Cauchy mass of types b of
    degree n-h whose counts are m - e_t; T collects the sets with positive
    target plus the leftover set I_0 when it is nonempty.  Kept as an
    independent check on :func:`joint_pmf`.
    """
    n = spec.n
    used = set().union(*(s.members for s in spec.sets))
    leftover = tuple(j for j in range(1, n + 1) if j not in used)
    groups = [(i, s.members) for i, s in enumerate(spec.sets) if spec.counts[i] > 0]
    if leftover:
        groups.append((None, leftover))
    total = Fraction(0)
    for t, members in groups:
        target = list(spec.counts)
        if t is not None:
            target[t] -= 1
        target = tuple(target)
        for h in members:
            rest = n - h
            for mult in _iter_mult(rest):
                c = tuple(
                    sum(mult[j - 1] for j in s.members if j <= rest) for s in spec.sets
                )
                if c == target:
                    total += Fraction(1, _centralizer(mult))
    return total / n


# -- marked-element recursion -------------------------------------------------


@lru_cache(maxsize=4096)
def _count_tables(key: tuple, n_max: int) -> tuple:
    """A_s = s! * (law of the counts at degree s), for s = 0..n_max.

    A_s = sum_{h=1}^{s} (s-1)!/(s-h)! * shift_{g(h)} A_{s-h}, where g(h) is
    the set containing h (or none).
    """
    r = len(key)
    group = [None] * (n_max + 1)
    for t, members in enumerate(key):
        for j in members:
            if j <= n_max:
                group[j] = t
    zero = (0,) * r
    tables = [{zero: 1}]
    for s in range(1, n_max + 1):
        acc: dict = defaultdict(int)
        ff = 1  # (s-1)!/(s-h)!
        for h in range(1, s + 1):
            if h > 1:
                ff *= s - h + 1
            t = group[h]
            prev = tables[s - h]
            if t is None:
                for c, v in prev.items():
                    acc[c] += ff * v
            else:
                for c, v in prev.items():
                    c2 = c[:t] + (c[t] + 1,) + c[t + 1 :]
                    acc[c2] += ff * v
        tables.append(dict(acc))
    return tuple(tables)


def cycle_count_law(n: int, sets: Sequence) -> dict:
    """Exact law of (C_{I_1}, ..., C_{I_r}) by the marked-element recursion."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    key = _sets_key(n, sets)
    table = _count_tables(key, n)[n]
    nfact = math.factorial(n)
    return {c: Fraction(v, nfact) for c, v in sorted(table.items())}


def count_law(n: int, index_set) -> Pmf:
    """Law of C_I as an exact Pmf on 0..n."""
    law = cycle_count_law(n, [index_set])
    top = max(c[0] for c in law)
    weights = [Fraction(0)] * (top + 1)
    for (c,), p in law.items():
        weights[c] = p
    return Pmf(0, tuple(weights))


# -- closed forms and recursions -----------------------------------------------


def goncharov_pmf(n: int, j: int, m: int) -> Fraction:
    """P(C_j = m) via the alternating inclusion-exclusion sum."""
    if not 1 <= j <= n:
        raise DomainError(f"need 1 <= j <= n, got j={j}, n={n}")
    if m < 0:
        raise DomainError("m must be nonnegative")
    if m > n // j:
        return Fraction(0)
    inv = Fraction(1, j)
    inner = sum(
        (-inv) ** h / math.factorial(h) for h in range(n // j - m + 1)
    )
    return inv**m / math.factorial(m) * inner


def binomial_moment(spec: JointSpec) -> Fraction:
    """E prod_j binom(C_{I_j}, m_j), summed over all cycle types."""
    law = joint_law(spec.n, spec.sets)
    total = Fraction(0)
    for c, p in law.items():
        term = 1
        for have, want in zip(c, spec.counts):
            term *= math.comb(have, want)
            if not term:
                break
        if term:
            total += term * p
    return total


def moment_upper(spec: JointSpec) -> Fraction:
    """prod_j H(I_j)^{m_j} / m_j!, the Poisson-model binomial moment."""
    out = Fraction(1)
    for s, m in zip(spec.sets, spec.counts):
        out *= harmonic_mass(s) ** m / math.factorial(m)
    return out


def moment_equality_case(spec: JointSpec) -> bool:
    """Whether sum_j m_j max(I_j) <= n (the exact-equality regime)."""
    total = 0
    for s, m in zip(spec.sets, spec.counts):
        if m and not s.members:
            return False
        if m:
            total += m * s.members[-1]
    return total <= spec.n


@lru_cache(maxsize=None)
def unsigned_stirling_row(n: int) -> tuple:
    """|s(n, k)| for k = 0..n via c(n,k) = c(n-1,k-1) + (n-1) c(n-1,k)."""
    row = [1]
    for i in range(1, n + 1):
        new = [0] * (i + 1)
        for k in range(1, i + 1):
            new[k] = row[k - 1] + (i - 1) * (row[k] if k < i else 0)
        row = new
    return tuple(row)


def total_cycles_pmf(n: int) -> Pmf:
    """Exact law of C on {1, ..., n}: P(C = k) = |s(n,k)| / n!."""
    if n < 1:
        raise DomainError("need n >= 1")
    row = unsigned_stirling_row(n)
    nfact = math.factorial(n)
    return Pmf(1, tuple(Fraction(c, nfact) for c in row[1:]))


def gruder_count(n: int, k: int, index_set) -> Fraction:
    """P_n(C_I = k, no cycle outside I): coefficient of x^n y^k in
    exp(y sum_{m in I} x^m / m), read off by a DP over the parts of I."""
    if n < 0 or k < 0:
        raise DomainError("need n >= 0 and k >= 0")
    members = index_set.members if isinstance(index_set, IndexSet) else sorted(set(index_set))
    parts = [j for j in members if 1 <= j <= n]
    # state (size, count) -> coefficient
    state = {(0, 0): Fraction(1)}
    for j in parts:
        new = defaultdict(Fraction)
        for (size, count), w in state.items():
            a = 0
            term = w
            while size + a * j <= n and count + a <= k:
                new[(size + a * j, count + a)] += term
                a += 1
                term = term / (j * a)
        state = new
    return state.get((n, k), Fraction(0))


_small_counts: dict = {}
_large_counts: dict = {}


def _extend(cache: dict, m: int, n: int, allowed: Callable[[int], bool]) -> list:
    table = cache.setdefault(m, [1])
    s = len(table)
    while s <= n:
        total = 0
        ff = 1
        for h in range(1, s + 1):
            if h > 1:
                ff *= s - h + 1
            if allowed(h):
                total += ff * table[s - h]
        table.append(total)
        s += 1
    return table


def no_small_count(n: int, m: int) -> int:
    """Number of permutations of [n] with every cycle longer than m."""
    if n < 0:
        return 0
    return _extend(_small_counts, m, n, lambda h: h > m)[n]


def no_small_prob(n: int, m: int) -> Fraction:
    """U(n, m) = P(C_{[m]} = 0); U(0, m) = 1 and U(n, m) = 0 for n < 0."""
    if n < 0:
        return Fraction(0)
    if m < 0:
        raise DomainError("m must be nonnegative")
    return Fraction(no_small_count(n, m), math.factorial(n))


def no_large_count(n: int, m: int) -> int:
    """Number of permutations of [n] with every cycle of length <= m."""
    if n < 0:
        return 0
    return _extend(_large_counts, m, n, lambda h: h <= m)[n]


def no_large_prob(n: int, m: int) -> Fraction:
    """nu(n, m) = P(no cycle longer than m).

    Same recursion as nu(n,m) = (1/n) sum_{k=n-m}^{n-1} nu(k,m), carried on
    the integer counts n! * nu(n, m).
    """
    if not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    return Fraction(no_large_count(n, m), math.factorial(n))


@lru_cache(maxsize=8)
def _fixed_set_counts(n: int) -> tuple:
    """Permutation counts admitting a fixed set of each size 0..n."""
    _check_cap(n)
    nfact = math.factorial(n)
    by_mask: dict = defaultdict(int)
    full = (1 << (n + 1)) - 1

    def rec(remaining, largest, mask, z):
        if remaining == 0:
            by_mask[mask] += nfact // z
            return
        for j in range(min(remaining, largest), 0, -1):
            grown = mask
            zz = z
            for m in range(1, remaining // j + 1):
                grown = (grown | (grown << j)) & full
                zz *= j * m
                rec(remaining - j * m, j - 1, grown, zz)

    rec(n, n, 1, 1)
    out = [0] * (n + 1)
    for mask, v in by_mask.items():
        k = 0
        while mask:
            if mask & 1:
                out[k] += v
            mask >>= 1
            k += 1
    return tuple(out)


def fixed_set_prob(n: int, k: int) -> Fraction:
    """i(n, k): probability that some k-subset of [n] is mapped to itself."""
    if n < 1:
        raise DomainError("need n >= 1")
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}")
    return Fraction(_fixed_set_counts(n)[k], math.factorial(n))


def expected_divisor_count(n: int) -> Fraction:
    """E 2^C, the mean number of fixed sets."""
    pmf = total_cycles_pmf(n)
    return sum((w * 2**k for k, w in pmf.items()), Fraction(0))


def smallest_cycle_cdf(n: int, j: int, k: int) -> Fraction:
    """P(D_j <= k) = P(C_{[k]} >= j), D_j the j-th smallest cycle length."""
    if not 1 <= j <= n or not 1 <= k <= n:
        raise DomainError(f"need 1 <= j, k <= n, got j={j}, k={k}, n={n}")
    law = count_law(n, IndexSet.interval(n, 1, k))
    return 1 - sum((law[h] for h in range(j)), Fraction(0))


def conditional_pmf(n: int, index_set: IndexSet, k: int) -> Pmf:
    """Law of C_I given C = k."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}")
    if not isinstance(index_set, IndexSet):
        index_set = IndexSet(n, tuple(index_set))
    pk = total_cycles_pmf(n)[k]
    if pk == 0:
        raise DomainError(f"P(C={k}) = 0, cannot condition")
    rest = index_set.complement()
    if rest.members:
        law = cycle_count_law(n, [index_set, rest])
        weights = [law.get((h, k - h), Fraction(0)) / pk for h in range(k + 1)]
    else:
        weights = [Fraction(0)] * k + [Fraction(1)]
    return Pmf(0, tuple(weights))


def repeated_cycle_prob(n: int, ell: int) -> Fraction:
    """P(C_j >= 2 for some j >= ell)."""
    if not 2 <= ell <= n:
        raise DomainError(f"need 2 <= ell <= n, got ell={ell}")
    # DP over part sizes: at most one cycle of each length >= ell
    state = [Fraction(0)] * (n + 1)
    state[0] = Fraction(1)
    for j in range(1, n + 1):
        new = [Fraction(0)] * (n + 1)
        top = 1 if j >= ell else n // j
        for size, w in enumerate(state):
            if not w:
                continue
            term = w
            for a in range(top + 1):
                if size + a * j > n:
                    break
                new[size + a * j] += term
                term = term / (j * (a + 1))
        state = new
    return 1 - state[n]


# -- brute-force oracle ---------------------------------------------------------


def _cycle_lengths(perm: Sequence[int]) -> list:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        lengths.append(length)
    return lengths


@lru_cache(maxsize=None)
def element_type_counts(n: int) -> tuple:
    """(mult, count) pairs obtained by walking all n! permutations."""
    if not 1 <= n <= ELEMENT_MODE_CAP:
        raise DomainError(f"element mode needs 1 <= n <= {ELEMENT_MODE_CAP}")
    tally: Counter = Counter()
    for perm in itertools.permutations(range(n)):
        mult = [0] * n
        for length in _cycle_lengths(perm):
            mult[length - 1] += 1
        tally[tuple(mult)] += 1
    return tuple(sorted(tally.items()))


def brute_force_oracle(
    n: int, predicate: Callable[[CycleType], bool], mode: str = "partition"
) -> Fraction:
    """Exact probability of ``predicate`` by exhaustive enumeration.

    ``mode="partition"`` sums Cauchy weights over cycle types (n <= 14);
    ``mode="element"`` walks every permutation of [n] (n <= 9) and so does
    not rely on Cauchy's formula at all.
    """
    if mode == "element":
        counts = element_type_counts(n)
        hits = sum(c for mult, c in counts if predicate(CycleType(n, mult)))
        return Fraction(hits, math.factorial(n))
    if mode != "partition":
        raise DomainError(f"unknown oracle mode {mode!r}")
    if not 1 <= n <= PARTITION_MODE_CAP:
        raise DomainError(f"partition mode needs 1 <= n <= {PARTITION_MODE_CAP}")
    total = Fraction(0)
    for mult in _iter_mult(n):
        t = CycleType(n, mult)
        if predicate(t):
            total += cauchy_pmf(t)
    return total


__all__ = [
    "JointSpec",
    "binomial_moment",
    "brute_force_oracle",
    "cauchy_pmf",
    "class_size",
    "conditional_pmf",
    "count_law",
    "cycle_count_law",
    "element_type_counts",
    "expected_divisor_count",
    "fixed_set_prob",
    "gruder_count",
    "goncharov_pmf",
    "harmonic",
    "iter_cycle_types",
    "joint_law",
    "joint_pmf",
    "marked_cycle_pmf",
    "no_large_prob",
    "no_small_prob",
    "repeated_cycle_prob",
    "smallest_cycle_cdf",
    "total_cycles_pmf",
    "unsigned_stirling_row",
]
