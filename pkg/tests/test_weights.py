import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import scalar_oracle as so
from matdyadic.dyadic import DyadicIndex, VectorField
from matdyadic.errors import InvalidInputError, NotPositiveDefiniteError
from matdyadic.weights import (
    WeightField,
    a2_characteristic,
    a2_profile,
    averages_tree,
    constant_weight,
    dyadic_maximal,
    generate,
    random_martingale,
    rotation,
    truncate,
    truncation_inverse,
    two_value,
    weight_haar_coeff,
)


def scalar(*vals):
    return WeightField(np.array(vals, dtype=float)[:, None, None])


def a2(w):
    return a2_characteristic(averages_tree(w))


def test_weight_validation():
    with pytest.raises(NotPositiveDefiniteError):
        scalar(1.0, -1.0)
    with pytest.raises(InvalidInputError):
        WeightField(np.ones((3, 1, 1)))
    w = WeightField(np.array([[[2.0, 1.0], [0.0, 2.0]]] * 2))
    np.testing.assert_array_equal(w.values[0], [[2, 0.5], [0.5, 2]])


def test_weight_haar_examples():
    t = averages_tree(constant_weight(np.diag([1.0, 3.0]), 3))
    np.testing.assert_allclose(weight_haar_coeff(t, DyadicIndex(1, 0)), 0, atol=1e-15)
    t = averages_tree(scalar(1, 4))
    assert weight_haar_coeff(t, DyadicIndex(0, 0))[0, 0] == pytest.approx(1.5)
    t = averages_tree(scalar(1, 1, 1, 9))
    assert weight_haar_coeff(t, DyadicIndex(1, 1))[0, 0] == pytest.approx(2 * math.sqrt(2))
    with pytest.raises(InvalidInputError):
        weight_haar_coeff(t, DyadicIndex(2, 0))


def test_a2_examples():
    assert a2(constant_weight(np.array([[2.0, 1.0], [1.0, 3.0]]), 4)) == pytest.approx(1, abs=1e-12)
    assert a2(scalar(1, 4)) == pytest.approx(1.5625, abs=1e-12)
    assert a2(scalar(1, 1, 1, 9)) == pytest.approx(25 / 9, abs=1e-12)
    prof = a2_profile(averages_tree(scalar(1, 1, 1, 9)))
    assert prof[0] == pytest.approx(7 / 3)
    assert int(np.argmax(prof)) == 2


def test_family_examples():
    assert a2(two_value(1.0, 3)) == pytest.approx(1.0, abs=1e-12)
    w = two_value(4.0, 1)
    np.testing.assert_allclose(w.values[:, 0, 0], [4, 0.25])
    assert a2(w) == pytest.approx(4.515625, abs=1e-12)
    np.testing.assert_allclose(rotation(1.0, 3).values, np.broadcast_to(np.eye(2), (8, 2, 2)),
                               atol=1e-15)
    with pytest.raises(InvalidInputError):
        two_value(0.0, 2)
    with pytest.raises(InvalidInputError):
        rotation(2.0, 0)
    with pytest.raises(InvalidInputError):
        generate("nope", 1.0, 2)


def test_martingale_deterministic():
    a = random_martingale(5, 4, 0.7, 3)
    b = random_martingale(5, 4, 0.7, 3)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, random_martingale(6, 4, 0.7, 3).values)


weights_st = st.builds(
    random_martingale,
    seed=st.integers(0, 10_000),
    depth=st.integers(1, 6),
    step=st.floats(0.0, 1.5),
    dim=st.integers(1, 3),
)


@given(weights_st)
@settings(max_examples=40, deadline=None)
def test_tree_invariants(w):
    t = averages_tree(w)
    n = t.n_internal
    idx = np.arange(n)
    np.testing.assert_allclose(t.mean[idx], 0.5 * (t.mean[2 * idx + 1] + t.mean[2 * idx + 2]),
                               atol=1e-14 * np.abs(t.mean).max())
    np.testing.assert_allclose(t.sqrt @ t.sqrt, t.mean, atol=1e-10 * np.abs(t.mean).max())
    jensen = np.linalg.eigvalsh(t.sqrt @ t.mean_inv @ t.sqrt)[:, 0]
    assert jensen.min() >= 1 - 1e-9
    assert a2_characteristic(t) >= 1 - 1e-9


@given(weights_st, st.floats(1e-3, 1e3), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_a2_invariances(w, c, seed):
    base = a2(w)
    assert a2(w.scaled(c)) == pytest.approx(base, rel=1e-10)
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((w.dim, w.dim)))
    assert a2(w.conjugated(q)) == pytest.approx(base, rel=1e-10)
    assert a2(w.refine(2)) == pytest.approx(base, rel=1e-10)


def test_truncate_examples():
    w = constant_weight(np.diag([0.01, 5.0]), 1)
    np.testing.assert_allclose(truncate(w, 2).values[0], np.diag([0.5, 2.0]), atol=1e-15)
    w = rotation(1.5, 3)
    np.testing.assert_allclose(truncate(w, 2).values, w.values, atol=1e-14)
    with pytest.raises(InvalidInputError):
        truncate(w, 1.0)


@given(weights_st, st.floats(1.05, 8.0))
@settings(max_examples=40, deadline=None)
def test_truncation_properties(w, n):
    wn = truncate(w, n)
    np.testing.assert_allclose(wn.inverse_values(), truncation_inverse(w, n), atol=1e-9 * n)
    lam = np.linalg.eigvalsh(wn.values)
    assert lam.min() >= 1 / n - 1e-9 and lam.max() <= n + 1e-9
    t, tn = averages_tree(w), averages_tree(wn)
    lhs = np.trace(tn.mean @ tn.mean_inv, axis1=1, axis2=2)
    rhs = 2 * w.dim + np.trace(t.mean @ t.mean_inv, axis1=1, axis2=2)
    assert np.all(lhs <= rhs * (1 + 1e-9))


def test_maximal_examples():
    w = constant_weight(np.eye(2), 2)
    f = VectorField(np.tile([3.0, 4.0], (4, 1)))
    np.testing.assert_allclose(dyadic_maximal(f, w), 5.0)
    m = dyadic_maximal(VectorField(np.array([[1.0], [0.0]])), scalar(1, 1))
    np.testing.assert_allclose(m, [1.0, 0.5])
    vals = [1.0, 4.0, 2.0, 0.5]
    m = dyadic_maximal(VectorField(np.ones((4, 1))), scalar(*vals))
    np.testing.assert_allclose(m, so.maximal([1.0] * 4, vals), rtol=1e-14)


@given(st.integers(0, 10_000), st.integers(1, 5))
@settings(max_examples=25, deadline=None)
def test_scalar_crosscheck(seed, depth):
    w = random_martingale(seed, depth, 0.8, dim=1)
    vals = list(w.values[:, 0, 0])
    f = list(np.random.default_rng(seed).standard_normal(1 << depth))
    assert a2(w) == pytest.approx(so.a2(vals), rel=1e-12)
    m = dyadic_maximal(VectorField(np.array(f)[:, None]), w)
    np.testing.assert_allclose(m, so.maximal(f, vals), rtol=1e-12)
