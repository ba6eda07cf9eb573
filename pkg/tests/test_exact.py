import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cyclestats import exact
from cyclestats.core import CycleType, DomainError, IndexSet, harmonic, harmonic_mass
from cyclestats.exact import JointSpec

from .oracles import element_prob, stirling_by_expansion, subset_sums


def spec(n, sets, counts):
    return JointSpec(n, tuple(IndexSet(n, tuple(s)) for s in sets), tuple(counts))


# -- cauchy -------------------------------------------------------------------------


def test_cauchy_examples():
    assert exact.cauchy_pmf(CycleType(3, (3, 0, 0))) == Fraction(1, 6)
    assert exact.cauchy_pmf(CycleType(4, (0, 2, 0, 0))) == Fraction(1, 8)
    assert exact.cauchy_pmf(CycleType(4, (1, 0, 1, 0))) == Fraction(1, 3)


@pytest.mark.parametrize("n", range(1, 9))
def test_cauchy_matches_element_enumeration(n):
    counts = dict(exact.element_type_counts(n))
    types = list(exact.iter_cycle_types(n))
    assert len(types) == len(counts)
    for t in types:
        assert exact.cauchy_pmf(t) == Fraction(counts[t.mult], math.factorial(n))


@pytest.mark.parametrize("n", [1, 5, 12, 25])
def test_cauchy_normalization(n):
    assert sum(exact.cauchy_pmf(t) for t in exact.iter_cycle_types(n)) == 1


def test_partition_counts_and_order():
    # p(n) for n = 1..10
    assert [sum(1 for _ in exact.iter_cycle_types(n)) for n in range(1, 11)] == [
        1, 2, 3, 5, 7, 11, 15, 22, 30, 42
    ]
    a = [t.mult for t in exact.iter_cycle_types(7)]
    assert a == [t.mult for t in exact.iter_cycle_types(7)]


# -- goncharov / joint ----------------------------------------------------------------


def test_goncharov_examples():
    assert exact.goncharov_pmf(3, 1, 0) == Fraction(1, 3)
    assert exact.goncharov_pmf(4, 2, 1) == Fraction(1, 4)
    assert exact.goncharov_pmf(5, 5, 1) == Fraction(1, 5)
    assert exact.goncharov_pmf(5, 2, 3) == 0
    with pytest.raises(DomainError):
        exact.goncharov_pmf(4, 5, 0)


@pytest.mark.parametrize("n", range(1, 13))
def test_goncharov_matches_joint(n):
    for j in range(1, n + 1):
        for m in range(n // j + 1):
            assert exact.goncharov_pmf(n, j, m) == exact.joint_pmf(spec(n, [[j]], [m]))


def test_goncharov_matches_derangements():
    # D_n = round(n!/e)
    for n in range(1, 15):
        assert exact.goncharov_pmf(n, 1, 0) * math.factorial(n) == round(math.factorial(n) / math.e)


def test_joint_examples():
    assert exact.joint_pmf(spec(4, [[2]], [1])) == Fraction(1, 4)
    assert exact.joint_pmf(spec(3, [[1], [2], [3]], [0, 0, 1])) == Fraction(1, 3)
    assert exact.joint_pmf(spec(2, [[1]], [1])) == 0


def test_joint_spec_validation():
    with pytest.raises(DomainError):
        spec(5, [[1, 2], [2, 3]], [0, 0])
    with pytest.raises(DomainError):
        spec(5, [[1]], [0, 1])
    with pytest.raises(DomainError):
        spec(5, [[1]], [-1])
    with pytest.raises(DomainError):
        JointSpec(5, (), ())


@st.composite
def joint_specs(draw, n_max=9):
    n = draw(st.integers(1, n_max))
    r = draw(st.integers(1, 3))
    labels = draw(st.lists(st.integers(0, r), min_size=n, max_size=n))
    sets = [[j + 1 for j in range(n) if labels[j] == t] for t in range(1, r + 1)]
    sets = [s for s in sets if s] or [[n]]
    counts = draw(st.lists(st.integers(0, 3), min_size=len(sets), max_size=len(sets)))
    return spec(n, sets, counts)


@given(joint_specs())
def test_marked_cycle_identity_matches_enumeration(s):
    assert exact.marked_cycle_pmf(s) == exact.joint_pmf(s)


@given(joint_specs(n_max=14))
def test_recursion_matches_enumeration(s):
    fast = exact.cycle_count_law(s.n, s.sets)
    slow = exact.joint_law(s.n, s.sets)
    assert fast == slow
    assert sum(fast.values()) == 1


@given(joint_specs(n_max=8))
def test_joint_matches_element_walk(s):
    want = element_prob(
        s.n, lambda t: all(t.count_in(I) == m for I, m in zip(s.sets, s.counts))
    )
    assert exact.joint_pmf(s) == want


# -- binomial moments -------------------------------------------------------------------


def test_binomial_moment_examples():
    assert exact.binomial_moment(spec(3, [[1, 2, 3]], [1])) == Fraction(11, 6)
    assert exact.binomial_moment(spec(4, [[3]], [2])) == 0
    s = spec(4, [[1], [2]], [1, 1])
    assert exact.binomial_moment(s) == Fraction(1, 2) == exact.moment_upper(s)
    assert exact.moment_equality_case(s)


def test_mean_cycle_count_is_harmonic():
    for n in range(1, 20):
        assert exact.binomial_moment(spec(n, [range(1, n + 1)], [1])) == harmonic(n)


@pytest.mark.parametrize("n", range(1, 8))
def test_binomial_moment_dichotomy_small(n):
    rng = random.Random(n)
    for _ in range(25):
        labels = [rng.randrange(3) for _ in range(n)]
        sets = [[j + 1 for j in range(n) if labels[j] == t] for t in (1, 2)]
        sets = [x for x in sets if x] or [[1]]
        counts = [rng.randrange(4) for _ in sets]
        s = spec(n, sets, counts)
        moment, upper = exact.binomial_moment(s), exact.moment_upper(s)
        assert moment <= upper
        assert (moment == upper) == exact.moment_equality_case(s)


# -- stirling / total cycles -----------------------------------------------------------


def test_total_cycles_examples():
    p3 = exact.total_cycles_pmf(3)
    assert [p3[k] for k in (1, 2, 3)] == [Fraction(1, 3), Fraction(1, 2), Fraction(1, 6)]
    assert exact.total_cycles_pmf(1)[1] == 1
    assert exact.total_cycles_pmf(4)[1] == Fraction(1, 4)


def test_stirling_row_against_rising_factorial():
    for n in range(0, 25):
        assert list(exact.unsigned_stirling_row(n)) == stirling_by_expansion(n)


@pytest.mark.parametrize("n", range(1, 9))
def test_total_cycles_matches_element_walk(n):
    pmf = exact.total_cycles_pmf(n)
    for k in range(1, n + 1):
        assert pmf[k] == element_prob(n, lambda t: t.total == k)


def test_divisor_expectation():
    assert exact.expected_divisor_count(1) == 2
    assert exact.expected_divisor_count(3) == 4
    assert exact.expected_divisor_count(7) == 8
    for n in range(1, 61):
        assert exact.expected_divisor_count(n) == n + 1


# -- gruder ----------------------------------------------------------------------------


def test_gruder_examples():
    assert exact.gruder_count(3, 2, IndexSet(3, (1, 2, 3))) == Fraction(1, 2)
    assert exact.gruder_count(3, 1, IndexSet(3, (2,))) == 0
    assert exact.gruder_count(4, 2, IndexSet(4, (2,))) == Fraction(1, 8)
    assert exact.gruder_count(0, 0, IndexSet(1, ())) == 1


@given(st.integers(1, 8), st.sets(st.integers(1, 8)), st.integers(0, 8))
def test_gruder_matches_element_walk(n, members, k):
    I = IndexSet(n, tuple(j for j in members if j <= n))
    want = element_prob(
        n, lambda t: t.count_in(I) == k and t.total == k
    )
    assert exact.gruder_count(n, k, I) == want


# -- U(n,m) and nu(n,m) -------------------------------------------------------------------


def test_no_small_examples():
    assert exact.no_small_prob(4, 1) == Fraction(3, 8)
    assert exact.no_small_prob(5, 4) == Fraction(1, 5)
    assert exact.no_small_prob(3, 0) == 1
    assert exact.no_small_prob(0, 3) == 1
    assert exact.no_small_prob(-2, 1) == 0
    assert exact.no_small_prob(4, 4) == 0
    with pytest.raises(DomainError):
        exact.no_small_prob(4, -1)


@pytest.mark.parametrize("n", range(1, 13))
def test_no_small_matches_joint(n):
    for m in range(0, n + 1):
        if m == 0:
            assert exact.no_small_prob(n, 0) == 1
            continue
        assert exact.no_small_prob(n, m) == exact.joint_pmf(spec(n, [range(1, m + 1)], [0]))


def test_no_large_examples():
    assert exact.no_large_prob(4, 2) == Fraction(5, 12)
    assert exact.no_large_prob(5, 1) == Fraction(1, 120)
    v = exact.no_large_prob(100, 50)
    assert v == 1 - harmonic(100) + harmonic(50)
    assert abs(float(v) - 0.3118) < 1e-4
    for bad in [(4, 0), (4, 5)]:
        with pytest.raises(DomainError):
            exact.no_large_prob(*bad)


def test_no_large_closed_form_upper_half():
    for n in range(1, 201):
        for m in range(math.ceil(n / 2), n + 1):
            if m >= 1:
                assert exact.no_large_prob(n, m) == 1 - (harmonic(n) - harmonic(m))


@pytest.mark.parametrize("n", range(1, 9))
def test_no_large_matches_element_walk(n):
    for m in range(1, n + 1):
        assert exact.no_large_prob(n, m) == element_prob(n, lambda t: max(t.lengths()) <= m)


def test_no_large_average_recursion():
    # nu(n,m) = (1/n) sum_{k=n-m}^{n-1} nu(k,m), nu(k,m) = 1 for k <= m
    for m in range(1, 8):
        for n in range(m + 1, 30):
            rhs = sum(
                (Fraction(1) if k <= m else exact.no_large_prob(k, m) for k in range(n - m, n)),
                Fraction(0),
            ) / n
            assert exact.no_large_prob(n, m) == rhs


# -- fixed sets -----------------------------------------------------------------------------


def test_fixed_set_examples():
    assert exact.fixed_set_prob(4, 2) == Fraction(5, 12)
    assert exact.fixed_set_prob(4, 1) == Fraction(5, 8)
    for n in (1, 6, 11):
        assert exact.fixed_set_prob(n, 0) == 1
        assert exact.fixed_set_prob(n, n) == 1


@pytest.mark.parametrize("n", range(1, 15))
def test_fixed_set_against_subset_sums(n):
    for k in range(n + 1):
        want = exact.brute_force_oracle(n, lambda t: k in subset_sums(t.lengths()))
        assert exact.fixed_set_prob(n, k) == want
        assert exact.fixed_set_prob(n, k) == exact.fixed_set_prob(n, n - k)


def test_fixed_set_cap(monkeypatch):
    monkeypatch.setattr(exact, "_partition_cap", 10)
    exact._fixed_set_counts.cache_clear()
    with pytest.raises(DomainError):
        exact.fixed_set_prob(11, 3)


# -- smallest cycles and conditional law ----------------------------------------------------


def test_smallest_cycle_examples():
    assert exact.smallest_cycle_cdf(4, 1, 1) == Fraction(5, 8)
    assert exact.smallest_cycle_cdf(4, 1, 4) == 1
    assert exact.smallest_cycle_cdf(4, 2, 1) == Fraction(7, 24)


@pytest.mark.parametrize("n", range(1, 9))
def test_smallest_cycle_matches_element_walk(n):
    for j in range(1, n + 1):
        prev = Fraction(0)
        for k in range(1, n + 1):
            got = exact.smallest_cycle_cdf(n, j, k)
            want = element_prob(n, lambda t: len(t.lengths()) >= j and sorted(t.lengths())[j - 1] <= k)
            assert got == want
            assert got >= prev
            prev = got
        if j == 1:
            assert prev == 1


def test_conditional_examples():
    p = exact.conditional_pmf(3, IndexSet(3, (1,)), 2)
    assert p[1] == 1
    p = exact.conditional_pmf(4, IndexSet(4, (1,)), 2)
    assert (p[0], p[1]) == (Fraction(3, 11), Fraction(8, 11))
    p = exact.conditional_pmf(2, IndexSet(2, (1, 2)), 1)
    assert p[1] == 1
    with pytest.raises(DomainError):
        exact.conditional_pmf(3, IndexSet(3, (1,)), 4)


@given(st.integers(1, 8), st.sets(st.integers(1, 8)), st.integers(1, 8))
def test_conditional_matches_element_walk(n, members, k):
    if k > n:
        return
    I = IndexSet(n, tuple(j for j in members if j <= n))
    pk = element_prob(n, lambda t: t.total == k)
    pmf = exact.conditional_pmf(n, I, k)
    assert sum(w for _, w in pmf.items()) == 1
    for h in range(k + 1):
        assert pmf[h] == element_prob(n, lambda t: t.total == k and t.count_in(I) == h) / pk


# -- repeated cycles, oracle modes, caps -----------------------------------------------------


def test_repeated_cycle_prob_matches_enumeration():
    for n in range(2, 13):
        for ell in range(2, n + 1):
            want = exact.brute_force_oracle(n, lambda t: any(t.count(j) >= 2 for j in range(ell, n + 1)))
            assert exact.repeated_cycle_prob(n, ell) == want


def test_brute_force_examples_and_caps():
    assert exact.brute_force_oracle(4, lambda t: t.count(1) == 0) == Fraction(3, 8)
    assert exact.brute_force_oracle(3, lambda t: True) == 1
    assert exact.brute_force_oracle(5, lambda t: t.total == 1) == Fraction(1, 5)
    assert exact.brute_force_oracle(5, lambda t: t.total == 1, mode="element") == Fraction(1, 5)
    with pytest.raises(DomainError):
        exact.brute_force_oracle(15, lambda t: True)
    with pytest.raises(DomainError):
        exact.brute_force_oracle(10, lambda t: True, mode="element")
    with pytest.raises(DomainError):
        exact.brute_force_oracle(3, lambda t: True, mode="other")


def test_partition_cap_override():
    old = exact.partition_cap()
    try:
        with pytest.raises(DomainError):
            exact.set_partition_cap(121)
        exact.set_partition_cap(5)
        with pytest.raises(DomainError):
            exact.joint_law(6, [IndexSet(6, (1,))])
    finally:
        exact.set_partition_cap(old)


def test_mass_of_sets_in_moment_bound():
    s = spec(6, [[1, 2], [3]], [2, 1])
    assert exact.moment_upper(s) == harmonic_mass([1, 2]) ** 2 / 2 * harmonic_mass([3])
