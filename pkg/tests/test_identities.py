import itertools
import random
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatty.identities import (
    COUNTEREXAMPLE,
    HOLDS,
    KNUTSON,
    PROVED,
    SPORADIC_PAIR,
    builtin_examples,
    nested_rational,
    rational_nested_equiv,
    search_collisions,
    verify_range,
)

# the census at max_den = 9 was computed once and frozen here
CENSUS_9 = 191


def test_complementary_pair_lhs_is_n_minus_one():
    rep = verify_range("floor(n*(sqrt(2)-1)) + floor(n*(2-sqrt(2)))", "n - 1", 1, 10**4)
    assert rep.verdict == HOLDS and rep.holds


def test_sporadic_pair_on_range():
    rep = verify_range("floor(floor(n*3/7)*2/9)", "floor(floor(n*1/3)*2/7)", -(10**5), 10**5)
    assert rep.verdict == HOLDS


def test_knutson_on_range():
    rep = verify_range(KNUTSON, lambda ns: (ns == 0).astype(np.int64), -(10**4), 10**4)
    assert rep.verdict == HOLDS


def test_counterexample_reported_first():
    rep = verify_range("floor(n*(sqrt(2)-1)) + floor(n*(2-sqrt(2)))", "n", -5, 100)
    assert rep.verdict == COUNTEREXAMPLE and not rep.holds
    n, a, b = rep.counterexample
    assert n == -5 and a != b
    assert rep.to_json()["counterexample"] == {"n": n, "lhs": a, "rhs": b}


def test_chunking_does_not_matter():
    a = verify_range(KNUTSON, "0", -300, 300, chunk=7)
    b = verify_range(KNUTSON, "0", -300, 300)
    assert a.counterexample == b.counterexample == (0, 1, 0)


def test_empty_range():
    with pytest.raises(ValueError):
        verify_range("n", "n", 5, 4)


def test_builtin_examples_hold():
    assert all(r.holds for r in builtin_examples(10**3, 10**3, 10**3))


# -- exact decisions ---------------------------------------------------------------------


def test_sporadic_pair_proved():
    a, b = SPORADIC_PAIR
    rep = rational_nested_equiv(a, b)
    assert rep.verdict == PROVED
    assert rep.certificate["period"] == 63 and rep.certificate["slope_a"] == Fraction(2, 21)


def test_halves_vs_quarter_and_one():
    rep = rational_nested_equiv(["1/2", "1/2"], ["1/4", "1"])
    assert rep.verdict == PROVED and rep.certificate["period"] == 4


def test_slope_mismatch_gives_counterexample():
    rep = rational_nested_equiv(["1/2", "1/2"], ["1/3", "2/3"])
    assert rep.verdict == COUNTEREXAMPLE
    n, a, b = rep.counterexample
    assert (n * 1 // 2) * 1 // 2 == a and (n * 1 // 3) * 2 // 3 == b and a != b


def test_equal_slope_but_different():
    rep = rational_nested_equiv(["1/2", "2/3"], ["2/3", "1/2"])
    assert rep.verdict == COUNTEREXAMPLE
    assert rep.counterexample[0] <= rep.certificate["period"]


def test_slope_mismatch_with_parameters_above_one():
    # deficits can exceed the nesting depth here, so the separation scan reaches further
    rep = rational_nested_equiv(["1/13"], ["1/13", "27/13", "36/13"])
    assert rep.verdict == COUNTEREXAMPLE and rep.counterexample == (13, 1, 5)


rat = st.fractions(Fraction(1, 13), 3, max_denominator=13)


@settings(max_examples=1000, deadline=None)
@given(st.lists(rat, min_size=1, max_size=4), st.integers(-500, 500))
def test_shift_identity(params, n):
    Q = np.prod([p.denominator for p in params], dtype=object)
    P = np.prod([p.numerator for p in params], dtype=object)
    ns = np.array([n, n + 1, n + 7], dtype=object)
    assert (nested_rational(params, ns + Q) - nested_rational(params, ns)).tolist() == [P] * 3


@settings(max_examples=200, deadline=None)
@given(st.lists(rat, min_size=1, max_size=3), st.lists(rat, min_size=1, max_size=3))
def test_decision_agrees_with_wide_scan(a, b):
    rep = rational_nested_equiv(a, b)
    ns = np.arange(-3000, 3001, dtype=np.int64)
    same = bool(np.all(nested_rational(a, ns) == nested_rational(b, ns)))
    if rep.verdict == PROVED:
        assert same
    else:
        n, x, y = rep.counterexample
        assert nested_rational(a, [n])[0] == x != y == nested_rational(b, [n])[0]


# -- collision census ------------------------------------------------------------------------


def _brute_census(max_den, d=2, span=10**4):
    fr = sorted({Fraction(p, q) for q in range(1, max_den + 1) for p in range(1, q)})
    ns = np.arange(-span, span + 1, dtype=np.int64)
    groups = defaultdict(list)
    for vec in itertools.product(fr, repeat=d):
        groups[tuple(nested_rational(vec, ns).tolist())].append(vec)
    pairs = set()
    for vecs in groups.values():
        for u, v in itertools.combinations(vecs, 2):
            if sorted(u) != sorted(v) and any(groups_key != 0 for groups_key in nested_rational(u, ns).tolist()):
                pairs.add(frozenset((u, v)))
    return pairs


@pytest.mark.parametrize("max_den", [2, 3, 4, 5])
def test_census_complete_and_sound_small(max_den):
    got = {frozenset((c.params_a, c.params_b)) for c in search_collisions(max_den)}
    assert got == _brute_census(max_den)


def test_census_counts():
    assert len(search_collisions(3)) == 0
    assert len(search_collisions(5)) == 10


def test_census_nine_frozen_and_contains_sporadic():
    pairs = search_collisions(9)
    assert len(pairs) == CENSUS_9
    keys = {frozenset((c.params_a, c.params_b)) for c in pairs}
    assert frozenset(SPORADIC_PAIR) in keys
    rng = random.Random(9)
    for c in rng.sample(pairs, 25):
        assert not c.trivial and c.d == 2
        lhs = f"floor(floor(n*{c.params_a[0]})*{c.params_a[1]})"
        rhs = f"floor(floor(n*{c.params_b[0]})*{c.params_b[1]})"
        assert verify_range(lhs, rhs, -2000, 2000).holds
        js = c.to_json()
        assert js["certificate"]["slope"] == str(c.slope)


def test_census_trivial_pairs_on_request():
    with_trivial = search_collisions(3, include_trivial=True)
    assert with_trivial and all(c.trivial for c in with_trivial)
    with pytest.raises(ValueError):
        search_collisions(1)
