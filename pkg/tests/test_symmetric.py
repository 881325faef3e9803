import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatty.errors import NegativeIntermediate, PairingFailure, WrongClusterCount
from beatty.reals import sqrt
from beatty.seqgen import gen_poly_of_floors
from beatty.symmetric import (
    CubeCorners,
    GradientSet,
    SymmetricForm,
    cluster_limit_points,
    construct_cube,
    invert_gradient_set,
    normalized_jumps,
    peel_cube_edges,
    recover_symmetric,
)

R2, R3, R5 = 2**0.5, 3**0.5, 5**0.5


def seq_for(form, alphas, N, extra=""):
    K = form.polynomial() + (f" + {extra}" if extra else "")
    return gen_poly_of_floors(K, alphas, N)


def true_corners(form, alphas):
    a = [float(x) for x in alphas]
    grad = form.gradient(a)
    base = sum(math.floor(x) * g for x, g in zip(a, grad))
    return construct_cube(grad, base)


# -- forms ------------------------------------------------------------------------


def test_form_parsing():
    assert SymmetricForm.parse("product:3") == SymmetricForm("product", 3)
    assert SymmetricForm.parse("powersum:2:3").D == 3
    assert str(SymmetricForm.parse("quadratic:4")) == "quadratic:4"
    for bad in ("product", "powersum:2", "cubic:2", "product:1", "quadratic:x"):
        with pytest.raises(ValueError):
            SymmetricForm.parse(bad)


def test_form_polynomials():
    assert SymmetricForm("product", 3).polynomial() == "x1*x2*x3"
    assert SymmetricForm("powersum", 2, 3).polynomial() == "x1^3+x2^3"
    assert SymmetricForm("quadratic", 2).polynomial() == "x1*x1+x1*x2+x2*x2"


# -- normalized jumps and clustering ----------------------------------------------------


def test_single_beatty_jumps():
    seq = gen_poly_of_floors("x1", [sqrt(2) + 1], 1000)
    _, delta = normalized_jumps(seq, 1)
    assert set(delta.tolist()) == {2.0, 3.0}


def test_product_jumps_near_closed_form_corners():
    form = SymmetricForm("product", 2)
    _, delta = normalized_jumps(seq_for(form, [sqrt(2), sqrt(3)], 10**4), 2)
    corners = np.array(true_corners(form, [R2, R3]))
    nearest = np.abs(delta[:, None] - corners[None, :]).min(axis=1)
    assert nearest.max() < 1e-2


def test_remainder_decays_like_one_over_n():
    form = SymmetricForm("powersum", 2, 2)
    corners = np.array(true_corners(form, [R2, R3]))
    scaled = []
    for N in (10**3, 10**4, 10**5):
        _, delta = normalized_jumps(seq_for(form, [sqrt(2), sqrt(3)], N, "x1"), 2)
        dev = np.abs(delta[:, None] - corners[None, :]).min(axis=1).max()
        scaled.append(dev * N)
    # C/n decay: dev * N stays bounded across decades
    assert max(scaled) < 4 * min(scaled) + 1e-9
    assert max(scaled) < 20


def test_window_validation():
    seq = gen_poly_of_floors("x1*x2", [sqrt(2), sqrt(3)], 100)
    with pytest.raises(ValueError):
        normalized_jumps(seq, 2, (0, 50))
    with pytest.raises(ValueError):
        normalized_jumps(seq, 2, (10, 100))


def test_cluster_synthetic():
    vals = [0.99, 1.01, 2.0, 2.02, 3.41, 3.40, 4.42, 4.40]
    c = cluster_limit_points(vals, 4, gap=0.5, min_samples=2)
    assert c.corners == pytest.approx([1.0, 2.01, 3.405, 4.41])
    assert c.base == pytest.approx(1.0) and c.counts == [2, 2, 2, 2]


def test_cluster_errors():
    with pytest.raises(WrongClusterCount):
        cluster_limit_points([1.0] * 50, 4)
    with pytest.raises(WrongClusterCount) as info:
        cluster_limit_points([0.0, 1.0, 2.0], 4, gap=0.5, min_samples=1)
    assert info.value.found == 3
    with pytest.raises(WrongClusterCount):
        cluster_limit_points([0.0] * 20 + [1.0] * 3, 2, gap=0.5)


# -- cube peeling---------------------------------------------------------------------------


def test_peel_examples():
    assert peel_cube_edges([0, 2, 3, 5]).values == [2, 3]
    assert peel_cube_edges([0, 1, 4, 5, 9, 10, 13, 14]).values == [1, 4, 9]
    assert peel_cube_edges([0, 1, 2, 3]).values == [1, 2]
    with pytest.raises(PairingFailure):
        peel_cube_edges([0, 1, 1, 2])
    with pytest.raises(PairingFailure):
        peel_cube_edges([0, 1, 2, 4])


def test_repeated_edges_allowed_on_request():
    assert peel_cube_edges([0, 1, 1, 2], require_distinct=False).values == [1, 1]


def _random_edges(rng, d):
    if rng.random() < 0.5:
        return [rng.randint(1, 40) for _ in range(d)]
    return [Fraction(rng.randint(1, 200), rng.randint(1, 12)) for _ in range(d)]


def test_peel_inverts_construct_on_random_cubes():
    rng = random.Random(20240601)
    for _ in range(10**4):
        d = rng.randint(1, 8)
        edges = _random_edges(rng, d)
        base = Fraction(rng.randint(-50, 50), rng.randint(1, 5))
        got = peel_cube_edges(construct_cube(edges, base), require_distinct=False)
        assert got.values == sorted(edges)


def test_generating_function_identity():
    rng = random.Random(7)
    pts = [rng.uniform(0.05, 0.95) for _ in range(16)]
    for _ in range(200):
        edges = _random_edges(rng, rng.randint(1, 6))
        corners = construct_cube(edges, 0)
        ys = peel_cube_edges(corners, require_distinct=False).values
        for z in pts:
            lhs = math.prod(1 + z ** float(x) for x in edges)
            assert lhs == pytest.approx(math.prod(1 + z ** float(y) for y in ys), rel=1e-12)
            assert lhs == pytest.approx(sum(z ** float(c) for c in corners), rel=1e-12)


def _is_cube_brute(ms, d):
    ms = sorted(ms)
    base = ms[0]
    pool = sorted({x - base for x in ms if x > base})
    for edges in itertools.combinations_with_replacement(pool, d):
        if construct_cube(edges, base) == ms:
            return True
    return False


@pytest.mark.parametrize("d, top", [(1, 6), (2, 7), (3, 6)])
def test_exhaustive_cube_decision(d, top):
    # peeling succeeds exactly on the multisets that are cubes
    for ms in itertools.combinations_with_replacement(range(top + 1), 2**d):
        if ms[0] != 0:
            continue
        try:
            peel_cube_edges(list(ms), require_distinct=False)
            ok = True
        except PairingFailure:
            ok = False
        assert ok == _is_cube_brute(ms, d), ms


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=2, max_size=6), st.data())
def test_perturbed_cubes_rejected_unless_cube(edges, data):
    corners = construct_cube(edges, 0)
    j = data.draw(st.integers(1, len(corners) - 1))
    corners[j] += data.draw(st.integers(1, 5))
    try:
        got = peel_cube_edges(corners, require_distinct=False)
    except PairingFailure:
        return
    assert construct_cube(got.values, min(corners)) == sorted(corners)


def test_tolerant_peel_on_noisy_corners():
    rng = random.Random(3)
    edges = [R2, R3, R5]
    corners = [c + rng.uniform(-1e-4, 1e-4) for c in construct_cube(edges, 1.0)]
    got = peel_cube_edges(CubeCorners(corners, [1e-4] * 8))
    assert got.values == pytest.approx(sorted(edges), abs=1e-3)


# -- inversion -------------------------------------------------------------------------------------


def test_inversion_examples():
    est = invert_gradient_set([R3, R2], SymmetricForm("product", 2))
    assert [e.value for e in est] == pytest.approx([R2, R3])
    est = invert_gradient_set([2 * R2, 2 * R3], SymmetricForm("powersum", 2, 2))
    assert [e.value for e in est] == pytest.approx([R2, R3])
    est = invert_gradient_set([4, 5], SymmetricForm("quadratic", 2))
    assert [e.value for e in est] == pytest.approx([1, 2])


def test_quadratic_negative_intermediate():
    with pytest.raises(NegativeIntermediate):
        invert_gradient_set([1, 10], SymmetricForm("quadratic", 2))


def test_gradient_set_positive():
    with pytest.raises(ValueError):
        GradientSet([1.0, -2.0])


FORMS = [SymmetricForm("product", 2), SymmetricForm("product", 4), SymmetricForm("powersum", 3, 2),
         SymmetricForm("powersum", 2, 5), SymmetricForm("quadratic", 2), SymmetricForm("quadratic", 5)]


@pytest.mark.parametrize("form", FORMS, ids=str)
def test_inversion_after_gradient_is_identity(form):
    rng = random.Random(str(form))
    for _ in range(100):
        alphas = sorted(rng.uniform(0.2, 6.0) for _ in range(form.d))
        est = invert_gradient_set(form.gradient(alphas), form)
        assert [e.value for e in est] == pytest.approx(alphas, rel=1e-9)


@pytest.mark.parametrize("form", FORMS, ids=str)
def test_inversion_radii_cover_perturbation(form):
    rng = random.Random(1 + form.d)
    alphas = sorted(rng.uniform(1.0, 3.0) for _ in range(form.d))
    L = [g + rng.uniform(-1e-5, 1e-5) for g in form.gradient(alphas)]
    est = invert_gradient_set(GradientSet(L, [1e-5] * form.d), form)
    # radii are first order, so allow a hair of curvature
    assert all(abs(e.value - t) <= 1.01 * e.radius for e, t in zip(est, alphas))


# -- round trips ----------------------------------------------------------------------------------------


def test_roundtrip_product():
    res = recover_symmetric(seq_for(SymmetricForm("product", 2), [sqrt(2), sqrt(3)], 10**5),
                            SymmetricForm("product", 2))
    assert res.values == pytest.approx([R2, R3], abs=1e-2)
    assert res.diagnostics["corners"] == pytest.approx(true_corners(SymmetricForm("product", 2), [R2, R3]), abs=1e-2)


def test_roundtrip_powersum_with_lower_order_term():
    form = SymmetricForm("powersum", 2, 2)
    res = recover_symmetric(seq_for(form, [sqrt(2), sqrt(3)], 10**5, "3*x1"), form)
    assert res.values == pytest.approx([R2, R3], abs=1e-2)
    assert res.ambiguity_note


def test_linear_relation_is_rejected():
    form = SymmetricForm("product", 2)
    with pytest.raises(WrongClusterCount):
        recover_symmetric(seq_for(form, [sqrt(2), 2 * sqrt(2)], 10**4), form)
