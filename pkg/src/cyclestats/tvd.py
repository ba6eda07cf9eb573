"""Total variation distance between small cycle counts and independent Poissons.

With Z_j ~ Poisson(1/j) independent and T = sum_j j Z_j,

    P(C_1 = h_1, ..., C_k = h_k) = w(h) U(n - T, k),
    P(Z_1 = h_1, ..., Z_k = h_k) = w(h) e^{-H_k},

where w(h) = prod (1/j)^{h_j} / h_j!.  Grouping h by T = t gives

    d_TV = sum_{t <= n} W(t) max(0, e^{-H_k} - U(n - t, k)) + P(T > n),

with W(t) = sum_{T(h) = t} w(h) the coefficient of x^t in
exp(x + x^2/2 + ... + x^k/k).  W is exact rational, U comes from the exact
module, and only e^{-H_k} and the final sum are done in mpmath.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import mpmath

from . import exact
from .core import DomainError, IndexSet, harmonic, harmonic_mass

DIGITS = 50
ORACLE_MAX_N = 20
ORACLE_MAX_K = 6
POISSON_TAIL = 1e-15


@dataclass(frozen=True)
class PoissonVectorLaw:
    """Independent Z_1..Z_k with Z_j ~ Poisson(1/j)."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("need k >= 1")

    @property
    def parameters(self) -> tuple:
        return tuple(Fraction(1, j) for j in range(1, self.k + 1))

    @property
    def float_parameters(self) -> tuple:
        return tuple(1.0 / j for j in range(1, self.k + 1))

    def weight(self, h: Sequence[int]) -> Fraction:
        """w(h) = prod (1/j)^{h_j} / h_j!, the mass without e^{-H_k}."""
        w = Fraction(1)
        for j, hj in enumerate(h, start=1):
            w /= j**hj * math.factorial(hj)
        return w

    def pmf(self, h: Sequence[int]):
        with mpmath.workdps(DIGITS):
            return _mpq(self.weight(h)) * mpmath.exp(-_mpq(harmonic(self.k)))


def _mpq(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


@lru_cache(maxsize=256)
def small_part_weights(n: int, k: int) -> tuple:
    """W(0..n): exact law of T = sum j Z_j times e^{H_k}, by convolving the
    series of each j Z_j truncated at n."""
    W = [Fraction(0)] * (n + 1)
    W[0] = Fraction(1)
    for j in range(1, k + 1):
        series = [Fraction(0)] * (n + 1)
        term = Fraction(1)
        for h in range(n // j + 1):
            series[h * j] = term
            term = term / (j * (h + 1))
        new = [Fraction(0)] * (n + 1)
        for a, wa in enumerate(W):
            if not wa:
                continue
            for b in range(0, n + 1 - a, j):
                if series[b]:
                    new[a + b] += wa * series[b]
        W = new
    return tuple(W)


def _digits(n: int) -> int:
    # the complement 1 - e^{-H_k} sum W cancels down to about 1/(n+1)!
    return DIGITS + int(math.lgamma(n + 2) / math.log(10))


def _check(n: int, k: int) -> None:
    if k < 1:
        raise DomainError("need k >= 1")
    if k > n:
        raise DomainError(f"need k <= n, got k={k}, n={n}")


def tvd_small_cycles(n: int, k: int) -> float:
    """d_TV((C_1..C_k), (Z_1..Z_k)) for a uniform permutation of [n]."""
    _check(n, k)
    W = small_part_weights(n, k)
    with mpmath.workdps(_digits(n)):
        e = mpmath.exp(-_mpq(harmonic(k)))
        body = mpmath.mpf(0)
        below = mpmath.mpf(0)
        for t, wt in enumerate(W):
            if not wt:
                continue
            w = _mpq(wt)
            below += w
            gap = e - _mpq(exact.no_small_prob(n - t, k))
            if gap > 0:
                body += w * gap
        tail = 1 - e * below
        return float(body + tail)


def _count_vectors(n: int, k: int) -> Iterator[tuple]:
    """Every h in N^k with sum j h_j <= n."""

    def rec(j: int, left: int, prefix: tuple):
        if j > k:
            yield prefix
            return
        for hj in range(left // j + 1):
            yield from rec(j + 1, left - j * hj, prefix + (hj,))

    yield from rec(1, n, ())


def tvd_definition_oracle(n: int, k: int) -> float:
    """d_TV as sum_h max(0, P(Z = h) - P(C = h)).

    P(C = h) comes from cycle-type enumeration.  C is supported on
    S = {h : sum j h_j <= n}, so outside S every term is P(Z = h) and those
    add up to 1 - P(Z in S); nothing is truncated.
    """
    _check(n, k)
    if n > ORACLE_MAX_N or k > ORACLE_MAX_K:
        raise DomainError(f"oracle needs n <= {ORACLE_MAX_N} and k <= {ORACLE_MAX_K}")
    singles = [IndexSet(n, (j,)) for j in range(1, k + 1)]
    perm_law = exact.joint_law(n, singles)
    law = PoissonVectorLaw(k)
    with mpmath.workdps(_digits(n)):
        e = mpmath.exp(-_mpq(harmonic(k)))
        inside = mpmath.mpf(0)
        excess = mpmath.mpf(0)
        for h in _count_vectors(n, k):
            pz = _mpq(law.weight(h)) * e
            pc = _mpq(perm_law.get(h, Fraction(0)))
            inside += pz
            if pz > pc:
                excess += pz - pc
        return float(excess + (1 - inside))


def _poisson_grid(lam: float) -> list:
    """Poisson(lam) pmf up to the point where the remaining tail < POISSON_TAIL."""
    if lam == 0:
        return [1.0]
    probs = []
    p = math.exp(-lam)
    total = 0.0
    h = 0
    while True:
        probs.append(p)
        total += p
        h += 1
        if h > lam and 1.0 - total < POISSON_TAIL:
            break
        p *= lam / h
    return probs


def grouped_poisson_approx(
    n: int, k: int, sets: Sequence, event: Callable[[tuple], bool]
) -> tuple:
    """(P((C_{I_1},..,C_{I_r}) in J), P((Y_1,..,Y_r) in J)) with
    independent Y_i ~ Poisson(H(I_i)); every I_i must lie in [k]."""
    _check(n, k)
    sets = [s if isinstance(s, IndexSet) else IndexSet(n, tuple(s)) for s in sets]
    if not sets:
        raise DomainError("need at least one set")
    seen: set = set()
    for s in sets:
        if s.members and s.members[-1] > k:
            raise DomainError(f"set {s} is not contained in [1, {k}]")
        if seen.intersection(s.members):
            raise DomainError("sets must be pairwise disjoint")
        seen.update(s.members)
    law = exact.cycle_count_law(n, sets)
    perm = float(sum((p for c, p in law.items() if event(c)), Fraction(0)))
    grids = [_poisson_grid(float(harmonic_mass(s))) for s in sets]
    pois = math.fsum(
        math.prod(g[i] for g, i in zip(grids, idx))
        for idx in itertools.product(*(range(len(g)) for g in grids))
        if event(idx)
    )
    return perm, pois
