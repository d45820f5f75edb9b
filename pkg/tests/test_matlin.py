import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matdyadic import matlin
from matdyadic.errors import InvalidInputError, NotPositiveDefiniteError

ROT = np.array([[2.5, 1.5], [1.5, 2.5]])


def spd(seed, dim, spread=2.0):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    lam = np.exp(rng.uniform(-spread, spread, dim))
    return (q * lam) @ q.T


def test_eig_examples():
    e = matlin.eig_sym(np.eye(2))
    np.testing.assert_allclose(e.values, [1, 1])
    e = matlin.eig_sym(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(e.values, [1, 4])
    np.testing.assert_allclose(np.abs(e.vectors), [[0, 1], [1, 0]])
    np.testing.assert_allclose(matlin.eig_sym(ROT).values, [1, 4], atol=1e-14)


@given(st.integers(0, 10_000), st.integers(1, 16))
@settings(max_examples=60, deadline=None)
def test_eig_invariants(seed, dim):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((dim, dim)) * 10 ** rng.uniform(-3, 3)
    m = m + m.T
    e = matlin.eig_sym(m)
    assert np.all(np.diff(e.values) >= 0)
    scale = max(1.0, np.linalg.norm(m))
    assert np.linalg.norm((e.vectors * e.values) @ e.vectors.T - m) <= 1e-12 * scale
    assert np.linalg.norm(e.vectors.T @ e.vectors - np.eye(dim)) <= 1e-12


def test_eig_batched_matches_single():
    mats = np.array([spd(s, 3) for s in range(5)])
    batch = matlin.eig_sym(mats)
    for m, vals in zip(mats, batch.values):
        np.testing.assert_allclose(vals, matlin.eig_sym(m).values, rtol=1e-13)


def test_as_sym_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        matlin.as_sym(np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        matlin.as_sym([[1.0, np.nan], [np.nan, 1.0]])
    np.testing.assert_array_equal(matlin.as_sym([[1, 2], [0, 1]]), [[1, 1], [1, 1]])


def test_sqrt_examples():
    np.testing.assert_allclose(matlin.sqrt_spd(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(matlin.sqrt_spd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    r = matlin.sqrt_spd(ROT)
    np.testing.assert_allclose(np.linalg.eigvalsh(r), [1, 2], atol=1e-14)
    np.testing.assert_allclose(r @ r, ROT, atol=1e-14)
    np.testing.assert_allclose(matlin.invsqrt_spd(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]))


@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=50, deadline=None)
def test_sqrt_invariants(seed, dim):
    m = spd(seed, dim, spread=4.0)
    r = matlin.sqrt_spd(m)
    assert np.linalg.norm(r @ r - m) <= 1e-9 * np.linalg.norm(m)
    ri = matlin.invsqrt_spd(m)
    assert np.linalg.norm(ri @ m @ ri - np.eye(dim)) <= 1e-9 * np.linalg.cond(m)
    np.testing.assert_allclose(matlin.inv_spd(m) @ m, np.eye(dim), atol=1e-9 * np.linalg.cond(m))


def test_pd_floor():
    with pytest.raises(NotPositiveDefiniteError):
        matlin.sqrt_spd(np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveDefiniteError):
        matlin.invsqrt_spd(np.diag([1.0, 1e-14]))
    matlin.invsqrt_spd(np.diag([1.0, 1e-12]))


def test_op_norm_examples():
    assert matlin.op_norm(np.eye(2)) == pytest.approx(1.0)
    assert matlin.op_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)
    assert matlin.op_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)


@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=50, deadline=None)
def test_op_norm_transpose_and_svd(seed, dim):
    g = np.random.default_rng(seed).standard_normal((dim, dim))
    assert matlin.op_norm(g.T) == pytest.approx(matlin.op_norm(g), rel=1e-12)
    assert matlin.op_norm(g) == pytest.approx(np.linalg.norm(g, 2), rel=1e-12)


def test_gen_eig_examples():
    b = spd(3, 3)
    assert matlin.gen_eig_extremes(b, b) == pytest.approx((1.0, 1.0), rel=1e-12)
    assert matlin.gen_eig_extremes(2 * b, b) == pytest.approx((2.0, 2.0), rel=1e-12)
    r8 = 2 * math.sqrt(2)
    a = np.diag([3.0, 1.0, 5.0])
    m = np.array([[3.0, 0, r8], [0, 1, 0], [r8, 0, 5]])
    lo, hi = matlin.gen_eig_extremes(a, m)
    x = 2 * math.sqrt(2) / math.sqrt(15)
    assert lo == pytest.approx(1 / (1 + x), rel=1e-12)
    assert hi == pytest.approx(1 / (1 - x), rel=1e-12)
    assert (lo, hi) == pytest.approx((0.57793, 3.70782), abs=1e-4)
    with pytest.raises(NotPositiveDefiniteError):
        matlin.gen_eig_extremes(a, np.diag([1.0, -1.0, 1.0]))


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=50, deadline=None)
def test_gen_eig_reciprocity(seed, dim):
    a, b = spd(seed, dim), spd(seed + 1, dim)
    assert matlin.gen_eig_extremes(a, b)[1] == pytest.approx(
        1 / matlin.gen_eig_extremes(b, a)[0], rel=1e-9)


def test_psd_leq_examples():
    assert matlin.psd_leq(np.eye(2), 2 * np.eye(2), 0)
    assert not matlin.psd_leq(np.diag([1.0, 3.0]), np.diag([2.0, 2.0]), 0)
    assert matlin.psd_leq(np.zeros((2, 2)), spd(1, 2), 0)


def _psd(rng, dim):
    x = rng.standard_normal((dim, dim))
    return x @ x.T


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=50, deadline=None)
def test_trace_facts(seed, dim):
    rng = np.random.default_rng(seed)
    a1, a2 = _psd(rng, dim), _psd(rng, dim)
    lam = matlin.op_norm(matlin.sqrt_spd(a1) @ matlin.sqrt_spd(a2)) ** 2
    tr = np.trace(a1 @ a2)
    assert lam <= tr * (1 + 1e-9)
    assert tr <= dim * lam * (1 + 1e-9)
    b1, b2 = a1 + _psd(rng, dim), a2 + _psd(rng, dim)
    assert tr <= np.trace(b1 @ b2) + 1e-9
