from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatty.errors import NoFullJumps, RationalCase, TrendMismatch
from beatty.jumps import (
    JumpHistogram,
    JumpPolynomial,
    fit_jump_polynomial,
    jump_histogram,
    jump_volumes,
    recover_gammas,
    recover_linear,
    roots_to_alphas,
)
from beatty.reals import sqrt
from beatty.seqgen import IntegerSequence, ParameterVector, gen_linear_sum

S2, S3, S5 = sqrt(2), sqrt(3), sqrt(5)


def circ(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1 - d)


def linear(alphas, N, gammas=()):
    return gen_linear_sum(ParameterVector(tuple(alphas), tuple(gammas)), N)


# -- histograms ------------------------------------------------------------


def test_histogram_constant_jumps():
    h = jump_histogram(IntegerSequence([0, 1, 2, 3, 4]))
    assert h.counts == {1: 4} and h.N == 5


def test_histogram_single_beatty_frequency():
    h = jump_histogram(linear([S2 - 1], 10**4))
    assert set(h.counts) == {0, 1}
    assert abs(h.counts[1] / (h.N - 1) - (2**0.5 - 1)) < 1e-3


def test_histogram_support_two_terms():
    assert set(jump_histogram(linear([S2 - 1, S3 - 1], 10**4)).counts) == {0, 1, 2}


def test_histogram_merge_matches_whole():
    seq = linear([S2 - 1, S3 - 1], 5000)
    whole = jump_histogram(seq)
    left = jump_histogram(IntegerSequence(seq.values[:2000]))
    right = jump_histogram(IntegerSequence(seq.values[1999:]))
    assert left.merge(right) == whole


def test_histogram_requires_two_terms():
    with pytest.raises(ValueError):
        jump_histogram(IntegerSequence([3]))


@pytest.mark.parametrize("ints", [(1, 0), (2, 3), (-1, 4), (5, -2)])
def test_detrending_shifts_by_integer_parts(ints):
    base = [S2 - 1, S3 - 1]
    raw = jump_histogram(linear([a + m for a, m in zip(base, ints)], 3000))
    norm = jump_histogram(linear(base, 3000))
    assert raw.offset == norm.offset + sum(ints)
    assert raw.detrended() == norm.detrended()


# -- jump polynomial --------------------------------------------------------------


def test_fit_normalizes():
    p = fit_jump_polynomial(JumpHistogram({0: 586, 1: 414}, 1001), 1)
    assert p.coefficients == pytest.approx([0.586, 0.414])


def test_fit_trend_mismatch():
    with pytest.raises(TrendMismatch):
        fit_jump_polynomial(JumpHistogram({0: 5, 3: 5}, 11), 2)


def test_two_term_frequencies_match_product_form():
    seq = linear([S2 - 1, S3 - 1], 10**5)
    p = fit_jump_polynomial(jump_histogram(seq), 2)
    vols = jump_volumes([2**0.5 - 1, 3**0.5 - 1])
    assert p.coefficients == pytest.approx(vols, abs=1e-3)
    # the top frequency is the product of the fractional parts
    assert abs(p.coefficients[2] - (2**0.5 - 1) * (3**0.5 - 1)) < 1e-3


def test_roots_half():
    est = roots_to_alphas(JumpPolynomial([Fraction(1, 2), Fraction(1, 2)]))
    assert [e.exact for e in est] == [Fraction(1, 2)]


def test_roots_quarter_two_thirds():
    p = JumpPolynomial.from_alphas([Fraction(1, 4), Fraction(2, 3)])
    assert p.coefficients == [Fraction(1, 4), Fraction(7, 12), Fraction(1, 6)]
    assert [e.exact for e in roots_to_alphas(p)] == [Fraction(1, 4), Fraction(2, 3)]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.fractions(Fraction(1, 97), Fraction(96, 97), max_denominator=97), min_size=1, max_size=5,
                unique=True))
def test_exact_product_roundtrip(alphas):
    est = roots_to_alphas(JumpPolynomial.from_alphas(alphas))
    assert [e.exact for e in est] == sorted(alphas)


def test_float_roots_have_radii():
    p = JumpPolynomial(jump_volumes([0.3, 0.7]), stderr=[1e-4] * 3)
    est = roots_to_alphas(p)
    assert [e.value for e in est] == pytest.approx([0.3, 0.7], abs=1e-9)
    assert all(0 < e.radius < 1e-2 for e in est)


def test_frequency_error_shrinks_with_N():
    pairs = [(S2 - 1, S3 - 1), (S5 - 2, (S5 - 1) / 2), (sqrt(7) - 2, sqrt(11) - 3), (sqrt(6) - 2, sqrt(10) - 3),
             (sqrt(13) - 3, S3 - 1)]
    medians = []
    for N in (10**3, 10**4, 10**5):
        errs = []
        for a, b in pairs:
            p = fit_jump_polynomial(jump_histogram(linear([a, b], N)), 2)
            errs.append(max(abs(x - y) for x, y in zip(p.coefficients, jump_volumes([float(a), float(b)]))))
        medians.append(float(np.median(errs)))
    assert medians[0] > medians[1] > medians[2]


# -- shifts -------------------------------------------------------------------------------


def test_gamma_single_term():
    g = recover_gammas(linear([S2 - 1], 10**5, ["1/4"]), [S2 - 1])
    assert circ(g[0].value, 0.25) < 5e-2
    assert circ(g[0].value, 0.25) <= g[0].radius + 1e-12


def test_gamma_zero_tends_to_zero():
    errs = []
    for N in (10**3, 10**4, 10**5):
        g = recover_gammas(linear([S2 - 1, S3 - 1], N), [S2 - 1, S3 - 1])
        errs.append(max(circ(e.value, 0.0) for e in g))
    assert errs[0] >= errs[1] >= errs[2]
    assert errs[2] < 1e-3


def test_no_full_jumps():
    with pytest.raises(NoFullJumps):
        recover_gammas(linear([S2 - 1, S3 - 1, S5 - 2], 3), [S2 - 1, S3 - 1, S5 - 2])


# -- orchestration ------------------------------------------------------------------------


def test_recover_three_terms():
    res = recover_linear(linear([S2 - 1, S3 - 1, S5 - 2], 10**5), 3)
    want = sorted([2**0.5 - 1, 3**0.5 - 1, 5**0.5 - 2])
    assert max(abs(a - b) for a, b in zip(res.values, want)) < 1e-2
    assert res.slope.value == pytest.approx(sum(want), abs=1e-4)
    assert res.ambiguity_note and "flags" in res.to_json()


def test_recover_integer_parts_via_slope():
    res = recover_linear(linear([S2 + 2, S3 - 1], 10**4), 2)
    assert res.diagnostics["integer_part_sum"] == 3
    assert "offset-slope-mismatch" not in res.flags


def test_identity_sequence_is_degenerate():
    res = recover_linear(IntegerSequence(np.arange(0, 1000)), 2)
    assert "degenerate" in res.flags
    assert res.slope.value == 1


def test_rational_case_reported():
    with pytest.raises(RationalCase):
        recover_linear(linear(["1/2", "1/2"], 1000), 1)
