import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatty.reals import RealExpr, floor_certified, parse_real, refine, sqrt
from beatty.seqgen import (
    FloorWord,
    IntegerSequence,
    ParameterVector,
    eval_T_word,
    gen_linear_sum,
    gen_nested,
    gen_poly_of_floors,
    iter_sequence,
)

mpmath.mp.dps = 200


def mp(x: RealExpr):
    return sum((mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(k) for k, c in x.terms), mpmath.mpf(0))


def test_complementary_pair_gives_n_minus_one():
    seq = gen_linear_sum(ParameterVector((sqrt(2) - 1, 2 - sqrt(2))), 5)
    assert seq.values.tolist() == [0, 1, 2, 3, 4]


def test_single_rational_beatty():
    assert gen_linear_sum(ParameterVector(("1/2",), ("0",)), 4).values.tolist() == [0, 1, 1, 2]


def test_shifted_pair_against_decimal_oracle():
    alphas, gammas = (sqrt(2) - 1, sqrt(3) - 1), (parse_real("1/4"), parse_real("1/2"))
    seq = gen_linear_sum(ParameterVector(alphas, gammas), 3)
    want = [sum(int(mpmath.floor(n * mp(a) + mp(g))) for a, g in zip(alphas, gammas)) for n in (1, 2, 3)]
    assert seq.values.tolist() == want


def test_poly_of_floors_examples():
    assert gen_poly_of_floors("x1*x2", [sqrt(5), sqrt(2)], 3).term(3) == 24
    assert gen_poly_of_floors("x1", ["7/3"], 3).values.tolist() == [2, 4, 7]
    assert gen_poly_of_floors("x1^2+x2^2", [sqrt(2), sqrt(3)], 2).term(2) == 13


def test_poly_arity_mismatch():
    with pytest.raises(ValueError):
        gen_poly_of_floors("x1*x2", [sqrt(2)], 3)


def test_nested_examples():
    seq = gen_nested(["3/7", "2/9"], 40)
    assert seq.values[:7].tolist() == [0] * 7
    first = next(n for n in range(1, 41) if seq.term(n))
    assert (first * 3) // 7 >= 5 and ((first - 1) * 3) // 7 < 5
    assert gen_nested(["1"], 6).values.tolist() == [1, 2, 3, 4, 5, 6]
    assert gen_nested([sqrt(2), sqrt(3)], 5).term(5) == 12


def test_T_word_examples():
    assert eval_T_word(FloorWord.from_str("1"), ["3/2"], 1) == 2
    assert eval_T_word(FloorWord.from_str("01"), [sqrt(2), sqrt(3)], 1) == 2
    alphas = [sqrt(2), sqrt(3), sqrt(5)]
    seq = gen_nested(alphas, 50)
    assert [eval_T_word(FloorWord.from_str("000"), alphas, n) for n in range(1, 51)] == seq.values.tolist()


def test_floor_word():
    w = FloorWord.from_str("1011")
    assert w.hamming_weight == 3 and len(w) == 4 and str(w) == "1011"
    words = FloorWord.all(3)
    assert [str(x) for x in words] == sorted(str(x) for x in words)
    with pytest.raises(ValueError):
        FloorWord((0, 2))
    with pytest.raises(ValueError):
        eval_T_word(w, [sqrt(2)], 1)


def test_parameter_vector_validation():
    with pytest.raises(ValueError):
        ParameterVector(())
    with pytest.raises(ValueError):
        ParameterVector((sqrt(2),), (0, 0))
    assert ParameterVector((sqrt(2), sqrt(3))).gammas == (0, 0)


@pytest.mark.parametrize("workers", [2, 3])
def test_workers_do_not_change_output(workers, monkeypatch):
    import beatty.seqgen as sg

    monkeypatch.setattr(sg, "BLOCK", 997)
    p = ParameterVector((sqrt(2) - 1, sqrt(3) - 1), ("1/4", "1/2"))
    assert gen_linear_sum(p, 5000, workers).values.tolist() == gen_linear_sum(p, 5000, 1).values.tolist()
    al = [sqrt(2), 1 + sqrt(3)]
    assert gen_nested(al, 5000, workers).values.tolist() == gen_nested(al, 5000).values.tolist()


def test_iter_sequence_matches_materialized(monkeypatch):
    import beatty.seqgen as sg

    monkeypatch.setattr(sg, "BLOCK", 101)
    al = [sqrt(2), sqrt(3)]
    assert list(iter_sequence("nested", 1000, alphas=al)) == gen_nested(al, 1000).values.tolist()
    assert list(iter_sequence("poly", 500, K="x1*x2", alphas=al)) == gen_poly_of_floors("x1*x2", al, 500).values.tolist()


def test_file_round_trip(tmp_path):
    seq = gen_nested([sqrt(2), sqrt(3)], 100)
    seq.meta.update({"family": "nested", "alphas": "sqrt(2),sqrt(3)"})
    path = tmp_path / "s.txt"
    seq.write(path)
    back = IntegerSequence.read(path)
    assert back.values.tolist() == seq.values.tolist()
    assert back.meta["family"] == "nested"
    assert back.parameters().alphas == (sqrt(2), sqrt(3))


def test_big_values_survive_round_trip(tmp_path):
    seq = IntegerSequence(np.array([10**30, -(10**25), 7], dtype=object))
    seq.write(tmp_path / "b.txt")
    assert IntegerSequence.read(tmp_path / "b.txt").values.tolist() == [10**30, -(10**25), 7]


def test_index_is_one_based():
    seq = IntegerSequence([5, 6, 7])
    assert seq.term(1) == 5 and seq.diffs().tolist() == [1, 1]
    with pytest.raises(IndexError):
        seq.term(0)


# -- properties -------------------------------------------------------------------------

alpha_pool = st.sampled_from([sqrt(2), sqrt(3), (1 + sqrt(5)) / 2, sqrt(7) / 2, 1 + sqrt(2) / 3, sqrt(10) - 1])


@settings(max_examples=40, deadline=None)
@given(st.lists(alpha_pool, min_size=1, max_size=3))
def test_nested_slope_bound(alphas):
    N = 2000
    seq = gen_nested(alphas, N)
    prod = alphas[0]
    for a in alphas[1:]:
        prod = prod * a
    # each floor loses less than one unit, later multiplied by the tail product
    bound = sum(float(np.prod([float(a) for a in alphas[i:]])) for i in range(1, len(alphas))) + 1
    iv = refine(prod, 64)
    assert abs(seq.term(N) - float(iv.mid) * N) <= bound


@settings(max_examples=40, deadline=None)
@given(st.lists(alpha_pool, min_size=1, max_size=3))
def test_monotone_when_alphas_at_least_one(alphas):
    assert np.all(np.diff(gen_nested(alphas, 500).values) >= 0)
    assert np.all(np.diff(gen_poly_of_floors("*".join(f"x{i + 1}" for i in range(len(alphas))), alphas, 500).values) >= 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([sqrt(2) - 1, sqrt(3) - 1, sqrt(5) - 2, (sqrt(5) - 1) / 2]), min_size=1, max_size=3))
def test_paired_complements(alphas):
    # floor(n a) + floor(n (1 - a)) = n - 1 for irrational a
    full = []
    for a in alphas:
        full += [a, 1 - a]
    seq = gen_linear_sum(ParameterVector(tuple(full)), 300)
    d = len(alphas)
    assert seq.values.tolist() == [d * (n - 1) for n in range(1, 301)]


@settings(max_examples=50, deadline=None)
@given(st.lists(alpha_pool, min_size=1, max_size=3), st.integers(1, 5000))
def test_nested_term_matches_certified_oracle(alphas, n):
    m = n
    for a in alphas:
        m = floor_certified(m * a)
    assert gen_nested(alphas, n).term(n) == m
