"""Explicit theorem bounds as formulas, checked against exact laws.

Every bound has a formula function ``_bound_<name>`` that validates the
hypotheses and returns the bound value, and an exact side that evaluates
the probability being bounded.  :func:`theorem_bound` ties both together
into a :class:`BoundReport`; :func:`bound_suite` sweeps a parameter grid.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .. import exact
from ..core import E_EXPONENT, HypothesisError, IndexSet, harmonic, harmonic_mass
from .dickman import DickmanTable, default_table, dickman_rho
from .special import q_function

TOLERANCE = 1e-12
# rho comes from quadrature; the sandwich gets a looser slack
SANDWICH_TOLERANCE = 1e-6
RECURSION_CAP = 400

BOUND_NAMES = (
    "joint",
    "single_set",
    "zero_count",
    "lower_tail",
    "upper_tail",
    "two_sided",
    "at_least_k",
    "two_equal_cycles",
    "total_cycles_lower",
    "no_large_cycles",
    "dickman_sandwich",
    "fixed_set_decay",
)


@dataclass
class BoundReport:
    name: str
    params: dict
    bound_value: float
    exact_value: float | None = None
    holds: bool | None = None
    kind: str = "upper"
    lower_value: float | None = None
    tolerance: float = TOLERANCE
    observed: float | None = None
    exact_rational: Fraction | None = field(default=None, repr=False)

    def as_record(self) -> dict:
        rec = {
            "bound": self.name,
            "kind": self.kind,
            "bound_value": self.bound_value,
            "exact_value": self.exact_value,
            "holds": self.holds,
            "tolerance": self.tolerance,
        }
        rec.update({k: _param_text(v) for k, v in self.params.items()})
        if self.lower_value is not None:
            rec["lower_value"] = self.lower_value
        if self.observed is not None:
            rec["observed"] = self.observed
        return rec


def _param_text(v):
    if isinstance(v, IndexSet):
        return str(v)
    if isinstance(v, (list, tuple)):
        if all(isinstance(x, IndexSet) for x in v):
            return ";".join(str(x) for x in v)
        return [_param_text(x) for x in v]
    if isinstance(v, Fraction):
        return float(v)
    return v


def _judge(kind: str, exact_value: float, bound: float, tol: float, lower: float | None = None):
    if kind == "upper":
        return exact_value <= bound + tol
    if kind == "lower":
        return exact_value >= bound - tol
    if kind == "two-sided":
        return lower - tol <= exact_value <= bound + tol
    return None


# -- parameter coercion -------------------------------------------------------


def _as_int(params: dict, key: str) -> int:
    if key not in params:
        raise HypothesisError(f"missing parameter {key!r}")
    v = params[key]
    try:
        iv = int(v)
    except (TypeError, ValueError) as exc:
        raise HypothesisError(f"parameter {key!r} must be an integer") from exc
    if iv != float(v):
        raise HypothesisError(f"parameter {key!r} must be an integer")
    return iv


def _as_float(params: dict, key: str) -> float:
    if key not in params:
        raise HypothesisError(f"missing parameter {key!r}")
    try:
        return float(Fraction(params[key]) if isinstance(params[key], str) else params[key])
    except (TypeError, ValueError) as exc:
        raise HypothesisError(f"parameter {key!r} must be a number") from exc


def _as_set(n: int, v, what: str = "I") -> IndexSet:
    if isinstance(v, IndexSet):
        if v.n != n:
            v = IndexSet(n, v.members)
        s = v
    elif isinstance(v, str):
        s = IndexSet.parse(n, v)
    else:
        s = IndexSet(n, tuple(v))
    if not s.members:
        raise HypothesisError(f"{what} must be nonempty")
    return s


def _n(params: dict) -> int:
    n = _as_int(params, "n")
    if n < 1:
        raise HypothesisError("need n >= 1")
    return n


def _sets(n: int, params: dict) -> list:
    raw = params.get("sets")
    if raw is None:
        raise HypothesisError("missing parameter 'sets'")
    if isinstance(raw, str):
        raw = raw.split(";")
    sets = [_as_set(n, s, "each I_j") for s in raw]
    seen: set = set()
    for s in sets:
        if seen.intersection(s.members):
            raise HypothesisError("sets must be pairwise disjoint")
        seen.update(s.members)
    return sets


def _counts(params: dict, r: int) -> list:
    raw = params.get("counts")
    if raw is None:
        raise HypothesisError("missing parameter 'counts'")
    if isinstance(raw, str):
        raw = [x for x in raw.replace(";", ",").split(",") if x]
    counts = [int(x) for x in raw]
    if len(counts) != r:
        raise HypothesisError("counts must match sets in length")
    if any(c < 0 for c in counts):
        raise HypothesisError("counts must be nonnegative")
    return counts


# -- bound formulas -------------------------------------------------------------


def joint_bound(n: int, masses: list, counts: list, covers: bool) -> float:
    """e^{H_n}/n prod_j (H_j^{m_j}/m_j! e^{-H_j}) (eps + sum_j m_j/H_j)."""
    hn = float(harmonic(n))
    log_prod = hn - math.log(n)
    tail = 0.0 if covers else 1.0
    for h, m in zip(masses, counts):
        log_prod += m * math.log(h) - math.lgamma(m + 1) - h
        tail += m / h
    if tail == 0.0:
        return 0.0
    return math.exp(log_prod) * tail


def single_set_bound(n: int, mass: float, m: int, full: bool) -> float:
    return joint_bound(n, [mass], [m], full)


def tail_bound_q(mass: float, lam: float) -> float:
    return 2.0 * math.exp(1.0 - q_function(lam) * mass)


def two_sided_bound(psi: float) -> float:
    return 20.0 * math.exp(-psi * psi / 3.0)


def strict_bound(mass: float, k: int) -> float:
    return math.exp(k * math.log(mass) - math.lgamma(k + 1)) if k else 1.0


def two_equal_bound(ell: int) -> float:
    return 1.0 / (2.0 * (ell - 1))


def allsets_lower(n: int, k: int) -> float:
    hn = float(harmonic(n))
    return hn ** (k - 1) / (n * math.factorial(k - 1)) * (1.0 - (k - 1) / math.log(n))


def no_large_bound(n: int, m: int) -> float:
    u = n / m
    return math.exp(-u * math.log(u) + u - 1.0)


def sandwich(n: int, m: int, table: DickmanTable) -> tuple:
    return dickman_rho(n / m, table), dickman_rho((n + 1) / (m + 1), table)


def _table_for(u: float, table: DickmanTable | None) -> DickmanTable:
    if table is not None and u <= table.u_max:
        return table
    return default_table(float(max(20, math.ceil(u))))


# -- single evaluation ----------------------------------------------------------


def theorem_bound(name: str, params: dict, verify: bool = True, table: DickmanTable | None = None) -> BoundReport:
    """Evaluate bound ``name`` at ``params`` and, when ``verify`` and the
    exact side is computable, attach the exact probability and ``holds``."""
    if name not in BOUND_NAMES:
        raise HypothesisError(f"unknown bound {name!r}; choose from {', '.join(BOUND_NAMES)}")
    n = _n(params)
    exact_ok = verify and n <= RECURSION_CAP
    kind = "upper"
    tol = TOLERANCE
    lower = None
    exact_q = None
    observed = None
    shown = {"n": n}

    if name == "joint":
        sets = _sets(n, params)
        counts = _counts(params, len(sets))
        covered = sum(len(s) for s in sets) == n
        bound = joint_bound(n, [float(harmonic_mass(s)) for s in sets], counts, covered)
        shown.update(sets=sets, counts=list(counts))
        if exact_ok:
            law = exact.cycle_count_law(n, sets)
            exact_q = law.get(tuple(counts), Fraction(0))
    elif name in ("single_set", "zero_count"):
        I = _as_set(n, params.get("I", params.get("set")))
        m = 0 if name == "zero_count" else _as_int(params, "m")
        if m < 0:
            raise HypothesisError("need m >= 0")
        full = len(I) == n
        if name == "zero_count":
            bound = math.exp(float(harmonic(n)) - float(harmonic_mass(I))) / n
        else:
            bound = single_set_bound(n, float(harmonic_mass(I)), m, full)
            shown["m"] = m
        shown["I"] = I
        if exact_ok:
            exact_q = exact.count_law(n, I)[m]
    elif name in ("lower_tail", "upper_tail"):
        I = _as_set(n, params.get("I", params.get("set")))
        lam = _as_float(params, "lam")
        mass = harmonic_mass(I)
        if name == "lower_tail" and not 0 <= lam <= 1:
            raise HypothesisError("lower_tail needs 0 <= lam <= 1")
        if name == "upper_tail" and lam < 1:
            raise HypothesisError("upper_tail needs lam >= 1")
        bound = tail_bound_q(float(mass), lam)
        shown.update(I=I, lam=lam)
        if exact_ok:
            law = exact.count_law(n, I)
            if name == "lower_tail":
                exact_q = sum((p for c, p in law.items() if c <= lam * mass), Fraction(0))
            else:
                exact_q = sum((p for c, p in law.items() if c >= lam * mass + 1), Fraction(0))
    elif name == "two_sided":
        I = _as_set(n, params.get("I", params.get("set")))
        psi = _as_float(params, "psi")
        mass = float(harmonic_mass(I))
        if not 0 <= psi <= math.sqrt(mass):
            raise HypothesisError("two_sided needs 0 <= psi <= sqrt(H(I))")
        bound = two_sided_bound(psi)
        shown.update(I=I, psi=psi)
        if exact_ok:
            law = exact.count_law(n, I)
            exact_q = sum(
                (p for c, p in law.items() if abs(c - mass) >= psi * math.sqrt(mass)), Fraction(0)
            )
    elif name == "at_least_k":
        I = _as_set(n, params.get("I", params.get("set")))
        k = _as_int(params, "k")
        if k < 0:
            raise HypothesisError("need k >= 0")
        bound = strict_bound(float(harmonic_mass(I)), k)
        shown.update(I=I, k=k)
        if exact_ok:
            law = exact.count_law(n, I)
            exact_q = sum((p for c, p in law.items() if c >= k), Fraction(0))
    elif name == "two_equal_cycles":
        ell = _as_int(params, "ell")
        if not 2 <= ell <= n:
            raise HypothesisError("two_equal_cycles needs 2 <= ell <= n")
        bound = two_equal_bound(ell)
        shown["ell"] = ell
        if exact_ok:
            exact_q = exact.repeated_cycle_prob(n, ell)
    elif name == "total_cycles_lower":
        k = _as_int(params, "k")
        if not (1 <= k and k < math.log(n)):
            raise HypothesisError("total_cycles_lower needs 1 <= k < log n")
        bound = allsets_lower(n, k)
        kind = "lower"
        shown["k"] = k
        if exact_ok:
            exact_q = exact.total_cycles_pmf(n)[k]
    elif name == "no_large_cycles":
        m = _as_int(params, "m")
        if not 1 <= m <= n:
            raise HypothesisError("no_large_cycles needs 1 <= m <= n")
        bound = no_large_bound(n, m)
        shown["m"] = m
        if exact_ok:
            exact_q = exact.no_large_prob(n, m)
    elif name == "dickman_sandwich":
        m = _as_int(params, "m")
        if not 1 <= m <= n:
            raise HypothesisError("dickman_sandwich needs 1 <= m <= n")
        tab = _table_for(n / m, table)
        lower, bound = sandwich(n, m, tab)
        kind = "two-sided"
        tol = SANDWICH_TOLERANCE
        shown["m"] = m
        if exact_ok:
            exact_q = exact.no_large_prob(n, m)
    else:  # fixed_set_decay
        k = _as_int(params, "k")
        if not 1 <= k <= n / 2:
            raise HypothesisError("fixed_set_decay needs 1 <= k <= n/2")
        bound = k ** (-E_EXPONENT)
        kind = "observe"
        shown["k"] = k
        if verify and n <= exact.partition_cap():
            exact_q = exact.fixed_set_prob(n, k)
            observed = float(exact_q) / bound

    report = BoundReport(name, shown, bound, kind=kind, lower_value=lower, tolerance=tol)
    if exact_q is not None:
        report.exact_rational = Fraction(exact_q)
        report.exact_value = float(exact_q)
        report.holds = _judge(kind, report.exact_value, bound, tol, lower)
        report.observed = observed
    return report


# one interval table per call; caching 800 of them costs far more than rebuilding
_uncached_tables = exact._count_tables.__wrapped__


# -- sweeps -------------------------------------------------------------------------


def _critical_lower(mass: Fraction, top: int) -> list:
    """lam values in [0, 1] where {C_I <= lam H} gains an outcome."""
    lams = {0.0, 1.0}
    for c in range(top + 1):
        lam = c / mass
        if lam <= 1:
            lams.add(float(lam))
    return sorted(lams)


def _critical_upper(mass: Fraction, top: int) -> list:
    """lam >= 1 where {C_I >= lam H + 1} is largest for its threshold."""
    lams = {1.0}
    for c in range(1, top + 2):
        lam = (c - 1) / mass
        if lam >= 1:
            lams.add(float(lam))
    return sorted(lams)


def _law_reports(n: int, I: IndexSet, law: dict) -> Iterator[BoundReport]:
    """All single-set bounds at (n, I) from a precomputed law of C_I."""
    mass_q = harmonic_mass(I)
    mass = float(mass_q)
    full = len(I) == n
    probs = [law.get(c, Fraction(0)) for c in range(n + 1)]
    fprobs = [float(p) for p in probs]
    # tail sums from the exact rationals
    ge = [Fraction(0)] * (n + 2)
    for c in range(n, -1, -1):
        ge[c] = ge[c + 1] + probs[c]
    shown = {"n": n, "I": I}

    def rep(name, params, bound, exact_q, kind="upper"):
        value = float(exact_q)
        return BoundReport(name, params, bound, value, _judge(kind, value, bound, TOLERANCE), kind)

    yield rep("zero_count", shown, math.exp(float(harmonic(n)) - mass) / n, probs[0])
    for m in range(n + 1):
        yield rep("single_set", {**shown, "m": m}, single_set_bound(n, mass, m, full), probs[m])
    for k in range(n + 2):
        yield rep("at_least_k", {**shown, "k": k}, strict_bound(mass, k), ge[min(k, n + 1)])
    for lam in _critical_lower(mass_q, n):
        cut = math.floor(lam * mass + 1e-12)
        yield rep("lower_tail", {**shown, "lam": lam}, tail_bound_q(mass, lam), 1 - ge[min(cut, n) + 1])
    for lam in _critical_upper(mass_q, n):
        cut = math.ceil(lam * mass + 1 - 1e-12)
        yield rep("upper_tail", {**shown, "lam": lam}, tail_bound_q(mass, lam), ge[min(max(cut, 0), n + 1)])
    root = math.sqrt(mass)
    psis = {0.0, root}
    for c in range(n + 1):
        psi = abs(c - mass) / root
        if psi <= root:
            psis.add(psi)
    for psi in sorted(psis):
        value = sum(p for c, p in enumerate(fprobs) if abs(c - mass) >= psi * root - 1e-12)
        yield rep("two_sided", {**shown, "psi": psi}, two_sided_bound(psi), value)


def random_subsets(n: int, count: int, rng: random.Random) -> list:
    out = []
    for _ in range(count):
        members = tuple(j for j in range(1, n + 1) if rng.random() < 0.5)
        if not members:
            members = (rng.randint(1, n),)
        out.append(IndexSet(n, members))
    return out


def bound_suite(
    n_max: int = 40,
    seed: int = 0,
    random_sets: int = 4,
    pair_sets: int = 3,
    table: DickmanTable | None = None,
) -> Iterator[BoundReport]:
    """Every covered bound on a grid with exact values up to ``n_max``.

    Single-set bounds run over every interval [a, b] of [n] plus
    ``random_sets`` seeded random subsets per n, at every critical value of
    the continuous parameters.  The joint bound uses ``pair_sets`` seeded
    pairs of disjoint subsets per n with every reachable count pair.
    """
    rng = random.Random(seed)
    if table is None:
        table = default_table(float(max(20, n_max + 1)))

    # intervals: one recursion table per interval serves every n >= b
    for a in range(1, n_max + 1):
        for b in range(a, n_max + 1):
            tables = _uncached_tables((tuple(range(a, b + 1)),), n_max)
            for n in range(b, n_max + 1):
                nfact = math.factorial(n)
                law = {c[0]: Fraction(v, nfact) for c, v in tables[n].items()}
                yield from _law_reports(n, IndexSet.interval(n, a, b), law)

    for n in range(1, n_max + 1):
        for I in random_subsets(n, random_sets, rng):
            law = {c[0]: p for c, p in exact.cycle_count_law(n, [I]).items()}
            yield from _law_reports(n, I, law)

        for _ in range(pair_sets if n >= 2 else 0):
            labels = [rng.randrange(3) for _ in range(n)]
            if 1 not in labels:
                labels[rng.randrange(n)] = 1
            if 2 not in labels:
                choices = [i for i in range(n) if labels[i] != 1] or [i for i in range(n) if labels.count(1) > 1 and labels[i] == 1]
                if not choices:
                    continue
                labels[rng.choice(choices)] = 2
            sets = [
                IndexSet(n, tuple(j + 1 for j in range(n) if labels[j] == t)) for t in (1, 2)
            ]
            covered = sum(len(s) for s in sets) == n
            masses = [float(harmonic_mass(s)) for s in sets]
            law = exact.cycle_count_law(n, sets)
            grid = set(law) | {(0, 0), (1, 0), (0, 1), (n, n)}
            for counts in sorted(grid):
                bound = joint_bound(n, masses, list(counts), covered)
                value = float(law.get(counts, Fraction(0)))
                yield BoundReport(
                    "joint",
                    {"n": n, "sets": sets, "counts": list(counts)},
                    bound,
                    value,
                    _judge("upper", value, bound, TOLERANCE),
                )

        for ell in range(2, n + 1):
            yield theorem_bound("two_equal_cycles", {"n": n, "ell": ell})
        k = 1
        while k < math.log(n):
            yield theorem_bound("total_cycles_lower", {"n": n, "k": k})
            k += 1
        for m in range(1, n + 1):
            yield theorem_bound("no_large_cycles", {"n": n, "m": m})
            yield theorem_bound("dickman_sandwich", {"n": n, "m": m}, table=table)
