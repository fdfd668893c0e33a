import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szego_frames.discrete_norms import (
    C_UPPER,
    PreconditionError,
    argsup_dilated_norm,
    dilated_discrete_norm,
    dilated_ring_norms,
    discrete_norm,
    fold,
    lemma4_bound,
    root_values,
    roots_of_unity,
    sup_dilated_norm,
    verify_eq5,
    verify_lemma3,
    verify_lemma4,
)
from szego_frames.hardy_core import HardyFunction, dilate, evaluate, h2_norm

from conftest import nonzero_polynomials, polynomials, random_poly


def direct_norm(f, k):
    """Oracle: Horner evaluation at each root, one at a time."""
    total = 0.0
    for j in range(k):
        w = complex(math.cos(2 * math.pi * j / k), math.sin(2 * math.pi * j / k))
        total += abs(evaluate(f, w)) ** 2
    return math.sqrt(total / k)


def test_c_upper_value():
    assert C_UPPER == pytest.approx(1.07541510253, abs=1e-11)
    assert C_UPPER <= 1.0754187
    assert C_UPPER == pytest.approx((1 - math.exp(-2)) ** -0.5, rel=1e-15)


def test_roots_examples():
    np.testing.assert_allclose(roots_of_unity(1), [1])
    np.testing.assert_allclose(roots_of_unity(2), [1, -1], atol=1e-15)
    np.testing.assert_allclose(roots_of_unity(4), [1, 1j, -1, -1j], atol=1e-15)
    with pytest.raises(ValueError):
        roots_of_unity(0)


def test_fold_sums_residue_classes():
    np.testing.assert_array_equal(fold([1, 2, 3, 4, 5], 2), [9, 6])
    np.testing.assert_array_equal(fold([1, 2], 4), [1, 2, 0, 0])


@pytest.mark.parametrize("k", [1, 2, 5, 16])
@pytest.mark.parametrize("m", [0, 1, 3, 7])
def test_monomial_norm(k, m):
    f = HardyFunction.monomial(m)
    assert discrete_norm(f, k) == pytest.approx(1, abs=1e-14)
    assert discrete_norm(HardyFunction.monomial(k), k) == pytest.approx(1, abs=1e-14)


def test_single_sample_point():
    assert discrete_norm(HardyFunction([1, 1]), 1) == 2


def test_root_values_match_horner(rng):
    f = random_poly(rng, 40)
    for k in (1, 3, 7, 41, 64):
        np.testing.assert_allclose(root_values(f, k), evaluate(f, roots_of_unity(k)), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("k,degree", [(4096, 8192), (1000, 3), (37, 2000), (2048, 100)])
def test_folding_matches_direct_evaluation_at_scale(rng, k, degree):
    f = random_poly(rng, degree)
    fast = discrete_norm(f, k)
    slow = float(np.sqrt(np.mean(np.abs(evaluate(f, roots_of_unity(k))) ** 2)))
    assert fast == pytest.approx(slow, rel=1e-10)


@given(polynomials(max_size=20), st.integers(1, 30))
def test_discrete_norm_matches_oracle(f, k):
    assert discrete_norm(f, k) == pytest.approx(direct_norm(f, k), rel=1e-10, abs=1e-12)


def test_lemma3_examples(rng):
    rep = verify_lemma3(HardyFunction([1, 1, 1]), 4)
    assert rep.ok and abs(rep.margin) < 1e-15
    assert rep.bound == pytest.approx(math.sqrt(3))
    with pytest.raises(PreconditionError, match="genuinely fails"):
        verify_lemma3(HardyFunction([0, 1]), 1)
    rep = verify_lemma3(random_poly(rng, 511), 512)
    assert rep.ok and abs(rep.margin) <= 1e-10 * (1 + rep.bound)


@given(polynomials(max_size=40), st.integers(0, 60))
def test_lemma3_identity(P, extra):
    rep = verify_lemma3(P, P.degree + 1 + extra)
    assert abs(rep.value - rep.bound) <= 1e-10 * (1 + rep.bound)


def test_lemma3_genuinely_fails_when_aliasing():
    P = HardyFunction([1, 0, 1])
    # 1 + z^2 at the square roots of unity is the constant 2
    assert discrete_norm(P, 2) == pytest.approx(2)
    assert h2_norm(P) == pytest.approx(math.sqrt(2))


def test_lemma4_examples():
    rep = verify_lemma4(HardyFunction([0, 0, 1]), 2, 0.5)
    assert rep.value == pytest.approx(0.25, rel=1e-15)
    assert rep.bound == pytest.approx(4 / math.sqrt(15), rel=1e-15)
    assert rep.margin > 0 and rep.ok
    rep = verify_lemma4(HardyFunction([0, 1]), 2, 0.5)
    assert rep.value == pytest.approx(0.5, rel=1e-15) and rep.ok
    for k in (1, 3, 50):
        for r in (0.01, 0.5, 0.999):
            rep = verify_lemma4(HardyFunction([1]), k, r)
            assert rep.value == pytest.approx(1, rel=1e-15) and rep.ok
    with pytest.raises(ValueError):
        verify_lemma4(HardyFunction([1]), 2, 1.0)


@given(polynomials(max_size=60), st.integers(1, 40), st.floats(1e-3, 1 - 1e-6))
def test_lemma4_margin_nonnegative(f, k, r):
    rep = verify_lemma4(f, k, r)
    assert rep.margin >= -1e-10 * max(1.0, rep.bound)


def test_lemma4_bound_accuracy_near_one():
    f = HardyFunction([1])
    r, k = 1 - 1e-9, 3
    assert lemma4_bound(f, k, r) == pytest.approx((1 - r ** (2 * k)) ** -0.5, rel=1e-6)


def test_dilated_ring_norms_agree_with_fft_path(rng):
    for degree in (0, 1, 5, 30):
        f = random_poly(rng, degree)
        fast = dilated_ring_norms(f, 80)
        slow = [dilated_discrete_norm(f, k) for k in range(1, 81)]
        np.testing.assert_allclose(fast, slow, rtol=1e-12)
        np.testing.assert_allclose(slow[1:], [direct_norm(dilate(f, 1 - 1 / k), k) for k in range(2, 81)], rtol=1e-10)
    assert dilated_ring_norms(HardyFunction([2, 5]), 1)[0] == 2


def test_sup_examples():
    for K in (1, 7, 100):
        assert sup_dilated_norm(HardyFunction([1]), K) == pytest.approx(1, rel=1e-15)
    assert sup_dilated_norm(HardyFunction([0, 1]), 100) == pytest.approx(0.99, rel=1e-14)
    v = sup_dilated_norm(HardyFunction([3, 4]), 200)
    assert 4.9 <= v <= 5 * 1.0755
    assert argsup_dilated_norm(HardyFunction([0, 1]), 100)[0] == 100


def test_eq5_examples(rng):
    up, lo = verify_eq5(HardyFunction([1]), 5)
    assert up.value == pytest.approx(1) and lo.bound == pytest.approx(1)
    assert up.ok and lo.ok
    up, lo = verify_eq5(HardyFunction.monomial(8), 800)
    assert up.value == pytest.approx((1 - 1 / 800) ** 8, rel=1e-14)
    assert up.value >= 0.99 and up.value <= 1.0755 and lo.margin >= -1e-10
    f = random_poly(rng, 16)
    up, lo = verify_eq5(f, 1600)
    assert up.margin >= -1e-9 and lo.margin >= -1e-9
    with pytest.raises(PreconditionError, match="raise"):
        verify_eq5(HardyFunction.monomial(8), 8)


@given(nonzero_polynomials(max_size=17))
def test_eq5_upper_bound(f):
    up, lo = verify_eq5(f, max(f.degree + 1, 64))
    assert up.value <= (1.0754187 + 1e-9) * h2_norm(f)
    assert lo.margin >= -1e-9 * max(1, lo.bound)


def test_lemma4_bound_at_ring_radius_below_c_upper():
    # (1 - 1/k)^(2k) increases to e^-2, so the dilation bound never exceeds C_UPPER
    k = np.arange(1, 20001, dtype=float)
    seq = (1 - 1 / k) ** (2 * k)
    assert np.all(np.diff(seq) > 0)
    f = HardyFunction([1])
    for kk in (2, 3, 10, 1000, 20000):
        assert lemma4_bound(f, kk, 1 - 1 / kk) <= C_UPPER
