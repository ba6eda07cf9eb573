"""Seeded sampling of cycle types.

The sampler is sequential: with r elements still unplaced, the cycle through
the smallest of them has length uniform on {1, ..., r}.  Only cycle lengths
are produced, never the permutation itself.

Trials are grouped in blocks of ``BLOCK`` and block b draws from a Philox
stream keyed by (seed, b).  The block layout does not depend on ``workers``,
so aggregates are a function of (n, trials, seed) alone.
"""
from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import exact
from .asymptotics.special import normal_cdf
from .core import CycleType, DomainError, IndexSet, harmonic_mass_float

BLOCK = 4096
MIN_TRIALS = 1000
Z95 = 1.96
# exact CDF limits for the CLT check
EXACT_TOTAL_MAX_N = 600
EXACT_SET_MAX_N = 120


@dataclass(frozen=True)
class SampleConfig:
    n: int
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need n >= 1")
        if self.trials < MIN_TRIALS:
            raise DomainError(f"need at least {MIN_TRIALS} trials, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise DomainError("need workers >= 1")


@dataclass(frozen=True)
class Estimate:
    point: float
    half_width_95: float
    trials: int

    @classmethod
    def from_count(cls, hits: int, trials: int) -> "Estimate":
        p = hits / trials
        return cls(p, Z95 * math.sqrt(p * (1.0 - p) / trials), trials)

    def as_record(self, experiment: str, params: dict, seed: int) -> dict:
        return {
            "experiment": experiment,
            "params": params,
            "seed": seed,
            "trials": self.trials,
            "point": self.point,
            "half_width_95": self.half_width_95,
        }


def block_stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def sample_cycle_type(n: int, stream: np.random.Generator) -> CycleType:
    """One cycle type of a uniform permutation of [n]."""
    if n < 1:
        raise DomainError("need n >= 1")
    lengths = []
    r = n
    while r:
        length = int(stream.integers(1, r + 1))
        lengths.append(length)
        r -= length
    return CycleType.from_lengths(lengths, n)


def sample_lengths(n: int, size: int, stream: np.random.Generator) -> np.ndarray:
    """``size`` independent draws as rows of cycle lengths, zero padded."""
    rest = np.full(size, n, dtype=np.int64)
    cols = []
    while True:
        active = rest > 0
        if not active.any():
            break
        col = np.zeros(size, dtype=np.int64)
        col[active] = stream.integers(1, rest[active] + 1)
        rest -= col
        cols.append(col)
    if not cols:
        return np.zeros((size, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def _blocks(trials: int) -> list:
    out = []
    start = 0
    b = 0
    while start < trials:
        size = min(BLOCK, trials - start)
        out.append((b, size))
        start += size
        b += 1
    return out


def map_blocks(config: SampleConfig, reduce_block: Callable[[np.ndarray], object]) -> list:
    """Apply ``reduce_block`` to each block's length matrix; results come
    back in block order whatever the worker count."""

    def work(item):
        b, size = item
        return reduce_block(sample_lengths(config.n, size, block_stream(config.seed, b)))

    items = _blocks(config.trials)
    if config.workers == 1:
        return [work(it) for it in items]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(work, items))


# -- count events ----------------------------------------------------------------

_OPS = {
    "==": np.equal,
    "=": np.equal,
    "!=": np.not_equal,
    "<=": np.less_equal,
    ">=": np.greater_equal,
    "<": np.less,
    ">": np.greater,
}
_TERM = re.compile(
    r"^\s*(?:C\[\s*(\d+)\s*(?:(?:\.\.|-)\s*(\d+)\s*)?\]|(Ctotal))\s*(==|!=|<=|>=|=|<|>)\s*(-?\d+)\s*$"
)


@dataclass(frozen=True)
class CountEvent:
    """Conjunction of comparisons on C[j], C[a..b] and Ctotal.

    Each clause is (lo, hi, op, value); ``Ctotal`` is stored as lo=1, hi=None.
    """

    clauses: tuple
    text: str = "true"

    def counts(self, lengths: np.ndarray, lo: int, hi: int | None) -> np.ndarray:
        if hi is None:
            return np.count_nonzero(lengths, axis=1)
        return np.count_nonzero((lengths >= lo) & (lengths <= hi), axis=1)

    def evaluate(self, lengths: np.ndarray) -> np.ndarray:
        ok = np.ones(lengths.shape[0], dtype=bool)
        for lo, hi, op, value in self.clauses:
            ok &= _OPS[op](self.counts(lengths, lo, hi), value)
        return ok

    def __call__(self, t: CycleType) -> bool:
        row = np.array([t.lengths()], dtype=np.int64)
        return bool(self.evaluate(row)[0])


def parse_event(text: str) -> CountEvent:
    """Parse e.g. ``"C[1]=0 & Ctotal>=3"`` or ``"C[2..5] >= 1"``."""
    text = text.strip()
    if text.lower() in ("", "true"):
        return CountEvent((), "true")
    clauses = []
    for piece in text.split("&"):
        m = _TERM.match(piece)
        if not m:
            raise DomainError(f"cannot parse event clause {piece.strip()!r}")
        a, b, total, op, value = m.groups()
        if total:
            clauses.append((1, None, op, int(value)))
        else:
            lo = int(a)
            hi = int(b) if b else lo
            if lo < 1 or hi < lo:
                raise DomainError(f"bad index range in {piece.strip()!r}")
            clauses.append((lo, hi, op, int(value)))
    return CountEvent(tuple(clauses), text)


def _vectorize(event) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(event, CountEvent):
        return event.evaluate

    def slow(lengths: np.ndarray) -> np.ndarray:
        n = int(lengths[0].sum()) if lengths.shape[0] else 0
        return np.array([bool(event(CycleType.from_lengths(row, n))) for row in lengths.tolist()])

    return slow


# -- estimators ---------------------------------------------------------------------


def estimate_event(n: int, event, config: SampleConfig) -> Estimate:
    """Frequency of ``event`` (a CountEvent or a CycleType predicate)."""
    if config.n != n:
        config = SampleConfig(n, config.trials, config.seed, config.workers)
    test = _vectorize(event)
    hits = sum(map_blocks(config, lambda L: int(np.count_nonzero(test(L)))))
    return Estimate.from_count(hits, config.trials)


def estimate_mean(n: int, statistic: Callable[[np.ndarray], np.ndarray], config: SampleConfig) -> Estimate:
    """Sample mean of a per-trial statistic with a normal 95% half-width.

    Block sums are combined with exact rational arithmetic, so the result
    does not depend on how blocks were scheduled.
    """
    if config.n != n:
        config = SampleConfig(n, config.trials, config.seed, config.workers)

    def reduce_block(L):
        v = np.asarray(statistic(L), dtype=float)
        return Fraction(math.fsum(v)), Fraction(math.fsum(v * v))

    parts = map_blocks(config, reduce_block)
    s1 = sum((p[0] for p in parts), Fraction(0))
    s2 = sum((p[1] for p in parts), Fraction(0))
    N = config.trials
    mean = s1 / N
    var = max(float(s2 / N - mean * mean), 0.0) * N / (N - 1)
    return Estimate(float(mean), Z95 * math.sqrt(var / N), N)


def cycle_type_frequencies(config: SampleConfig) -> dict:
    """Counts of each sampled multiplicity vector (small n only)."""
    n = config.n
    if n > 64:
        raise DomainError("type frequencies are tabulated for n <= 64 only")

    def reduce_block(L):
        rows = np.repeat(np.arange(L.shape[0]), L.shape[1])
        M = np.zeros((L.shape[0], n + 1), dtype=np.int64)
        np.add.at(M, (rows, L.ravel()), 1)
        types, counts = np.unique(M[:, 1:], axis=0, return_counts=True)
        return {tuple(int(x) for x in t): int(c) for t, c in zip(types, counts)}

    tally: dict = {}
    for part in map_blocks(config, reduce_block):
        for t, c in part.items():
            tally[t] = tally.get(t, 0) + c
    return dict(sorted(tally.items()))


# -- experiments ----------------------------------------------------------------------


def growth_band(m: np.ndarray) -> np.ndarray:
    """2 sqrt(log m log log m), with the radicand clamped at 0."""
    lm = np.log(m)
    with np.errstate(invalid="ignore", divide="ignore"):
        rad = lm * np.log(lm)
    return 2.0 * np.sqrt(np.clip(np.nan_to_num(rad, nan=0.0, neginf=0.0), 0.0, None))


def uniform_growth_experiment(n: int, xi: int, config: SampleConfig) -> Estimate:
    """P(|C_[m] - log m| < 2 sqrt(log m log log m) for every xi <= m <= n)."""
    if not 2 <= xi <= n:
        raise DomainError(f"need 2 <= xi <= n, got xi={xi}")
    if config.n != n:
        config = SampleConfig(n, config.trials, config.seed, config.workers)
    ms = np.arange(xi, n + 1, dtype=float)
    band = growth_band(ms)
    upper = np.log(ms) + band  # need C_[m] < upper
    lower = np.log(ms) - band  # need C_[m] > lower

    def reduce_block(L):
        hits = 0
        for row in L:
            lengths = np.sort(row[row > 0])
            # C_[m] is constant between consecutive distinct lengths
            base = int(np.count_nonzero(lengths < xi))
            cuts = np.unique(lengths[lengths >= xi])
            starts = np.concatenate(([0], cuts - xi))
            starts = np.unique(starts)
            levels = base + np.searchsorted(lengths[lengths >= xi], starts + xi, side="right")
            ok = np.all(levels < np.minimum.reduceat(upper, starts)) and np.all(
                levels > np.maximum.reduceat(lower, starts)
            )
            hits += bool(ok)
        return hits

    return Estimate.from_count(sum(map_blocks(config, reduce_block)), config.trials)


def smallest_cycle_experiment(n: int, theta: float, config: SampleConfig) -> Estimate:
    """P(|log D_j - j| < 3 sqrt(j log j) for every theta <= j <= C), D_j the
    j-th smallest cycle length."""
    if not 1 <= theta <= math.log(n):
        raise DomainError(f"need 1 <= theta <= log n, got theta={theta}")
    if config.n != n:
        config = SampleConfig(n, config.trials, config.seed, config.workers)
    j0 = math.ceil(theta)

    def reduce_block(L):
        big = np.iinfo(np.int64).max
        D = np.sort(np.where(L > 0, L, big), axis=1)
        total = np.count_nonzero(L, axis=1)
        width = D.shape[1]
        if width < j0:
            return L.shape[0]
        j = np.arange(j0, width + 1, dtype=float)
        cols = D[:, j0 - 1 :]
        present = (np.arange(j0, width + 1)[None, :]) <= total[:, None]
        with np.errstate(divide="ignore"):
            dev = np.abs(np.log(np.where(present, cols, 1).astype(float)) - j[None, :])
        good = (dev < 3.0 * np.sqrt(j * np.log(j))[None, :]) | ~present
        return int(np.count_nonzero(good.all(axis=1)))

    return Estimate.from_count(sum(map_blocks(config, reduce_block)), config.trials)


def _sup_error_from_cdf(points: np.ndarray, cdf: np.ndarray, mass: float, w_grid: np.ndarray) -> float:
    """sup over w_grid of |F(H + w sqrt H) - Phi(w)|; F is a step CDF with
    value cdf[i] on [points[i], points[i+1])."""
    x = mass + w_grid * math.sqrt(mass)
    idx = np.searchsorted(points, x, side="right") - 1
    F = np.where(idx >= 0, cdf[np.clip(idx, 0, None)], 0.0)
    phi = np.array([normal_cdf(w) for w in w_grid])
    return float(np.max(np.abs(F - phi)))


def exact_clt_cdf(n: int, index_set: IndexSet):
    """(support, CDF) of C_I from the exact module, or None when too large."""
    full = len(index_set) == n
    if full and n <= EXACT_TOTAL_MAX_N:
        pmf = exact.total_cycles_pmf(n)
    elif n <= EXACT_SET_MAX_N:
        pmf = exact.count_law(n, index_set)
    else:
        return None
    support = np.array(list(pmf.support), dtype=float)
    cdf = np.cumsum([float(w) for w in pmf.weights])
    return support, cdf


def clt_empirical_error(
    n: int,
    index_set: IndexSet,
    config: SampleConfig | None = None,
    w_grid: Sequence[float] | None = None,
    force_sampling: bool = False,
) -> float:
    """sup over w_grid of |P(C_I <= H(I) + w sqrt(H(I))) - Phi(w)|.

    Uses the exact law of C_I when it is cheap, otherwise the empirical CDF
    of ``config.trials`` samples.
    """
    mass = harmonic_mass_float(index_set)
    if mass < 3:
        raise DomainError(f"need H(I) >= 3, got {mass:.6g}")
    w = np.linspace(-3.0, 3.0, 601) if w_grid is None else np.asarray(w_grid, dtype=float)
    table = None if force_sampling else exact_clt_cdf(n, index_set)
    if table is not None:
        return _sup_error_from_cdf(table[0], table[1], mass, w)
    if config is None:
        raise DomainError("sampling needs a SampleConfig")
    if config.n != n:
        config = SampleConfig(n, config.trials, config.seed, config.workers)
    members = np.array(index_set.members, dtype=np.int64)
    # a length lies in I iff it is a member; lengths are at most n
    lookup = np.zeros(n + 1, dtype=bool)
    lookup[members] = True

    def reduce_block(L):
        return np.bincount(np.count_nonzero(lookup[L], axis=1), minlength=n + 1)[: n + 1]

    hist = sum(map_blocks(config, reduce_block))
    cdf = np.cumsum(hist) / config.trials
    return _sup_error_from_cdf(np.arange(n + 1, dtype=float), cdf, mass, w)


def exact_clt_sup_error(n: int, index_set: IndexSet) -> float:
    """sup over all real w of |P(C_I <= H + w sqrt H) - Phi(w)| from the
    exact law.  Between jumps the CDF is flat and Phi monotone, so the sup
    sits at a jump point, approached from one side or the other."""
    mass = harmonic_mass_float(index_set)
    table = exact_clt_cdf(n, index_set)
    if table is None:
        raise DomainError(f"exact law of C_I is not tabulated at n={n}")
    support, cdf = table
    root = math.sqrt(mass)
    phi = [normal_cdf((c - mass) / root) for c in support]
    worst = phi[0]  # F = 0 just left of the first jump
    for i, F in enumerate(cdf):
        worst = max(worst, abs(F - phi[i]))
        right = phi[i + 1] if i + 1 < len(phi) else 1.0
        worst = max(worst, abs(F - right))
    return float(worst)
