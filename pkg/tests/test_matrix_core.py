import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import jordan_nilpotent, random_nilpotent
from singpert.errors import DimensionMismatch, InputError, NotNilpotent, Overflow, Singular
from singpert.matrix_core import (
    as_matrix,
    mat_exp,
    mat_inverse,
    nilpotency_index,
    nilpotent_shift_split,
    operator_norm,
    rank_split,
    spectral_data,
)


def test_as_matrix_rejects_bad_shapes_and_values():
    with pytest.raises(DimensionMismatch):
        as_matrix([[1.0, 2.0]])
    with pytest.raises(InputError):
        as_matrix([[np.nan]])
    assert as_matrix(3.0).shape == (1, 1)


@pytest.mark.parametrize(
    "M, expected",
    [(np.zeros((2, 2)), 0.0), (np.eye(2), math.sqrt(2)), ([[3.0, 4.0], [0.0, 0.0]], 5.0)],
)
def test_operator_norm(M, expected):
    assert operator_norm(M) == pytest.approx(expected)


def test_nilpotency_examples():
    assert nilpotency_index([[0.0, 1.0], [0.0, 0.0]]).q == 2
    assert nilpotency_index(np.zeros((3, 3))).q == 1
    assert nilpotency_index(jordan_nilpotent([3, 1])).q == 3
    with pytest.raises(NotNilpotent):
        nilpotency_index([[1.0]])


def test_nilpotency_certificate_fields():
    cert = nilpotency_index(jordan_nilpotent([2]), tol=1e-9)
    assert cert.tol == 1e-9
    assert cert.residual >= 0
    with pytest.raises(InputError):
        nilpotency_index(np.zeros((2, 2)), tol=-1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_nilpotency_of_similar_jordan_forms(n, seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, n + 1))
    N = random_nilpotent(rng, n, q)
    assert nilpotency_index(N, tol=1e-10).q == q


def test_mat_exp_examples():
    np.testing.assert_allclose(mat_exp(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_array_equal(mat_exp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]])
    np.testing.assert_allclose(mat_exp(np.diag([-1.0, -2.0])), np.diag([math.exp(-1), math.exp(-2)]), rtol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 30.0), st.integers(0, 2**31 - 1))
def test_mat_exp_matches_scipy(n, scale, seed):
    rng = np.random.default_rng(seed)
    M = scale * rng.standard_normal((n, n)) / math.sqrt(n)
    M = M - (np.max(np.linalg.eigvals(M).real) + 1.0) * np.eye(n)  # keep it decaying
    ref = scipy.linalg.expm(M)
    np.testing.assert_allclose(mat_exp(M), ref, rtol=1e-9, atol=1e-12 * np.linalg.norm(ref))


def test_mat_exp_shift_plus_nilpotent_is_exact_series():
    N = jordan_nilpotent([3])
    i = 50.0
    A = -i * np.eye(3) - i**2 * N
    assert nilpotent_shift_split(A) is not None
    t = 0.3
    expected = math.exp(-i * t) * (np.eye(3) - i**2 * t * N + 0.5 * (i**2 * t) ** 2 * N @ N)
    np.testing.assert_allclose(mat_exp(A * t), expected, rtol=1e-13)


def test_mat_exp_overflow():
    with pytest.raises(Overflow):
        mat_exp([[800.0]])
    with pytest.raises(Overflow):
        mat_exp([[700.0, 1.0], [3.0, 900.0]])


def test_mat_inverse_examples():
    np.testing.assert_array_equal(mat_inverse(np.eye(3)), np.eye(3))
    Ni = np.array([[0.0, 1.0], [0.0, 0.0]]) - 0.1 * np.eye(2)
    np.testing.assert_allclose(mat_inverse(Ni), [[-10.0, -100.0], [0.0, -10.0]], rtol=1e-14)
    with pytest.raises(Singular):
        mat_inverse([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(Singular):
        mat_inverse(np.zeros((2, 2)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_mat_inverse_is_inverse(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + n * np.eye(n)
    np.testing.assert_allclose(mat_inverse(M) @ M, np.eye(n), atol=1e-12)


def test_rank_split_examples():
    r, R, K = rank_split(np.eye(3))
    assert r == 3 and K.shape == (3, 0)
    r, R, K = rank_split(np.zeros((2, 2)))
    assert r == 0 and R.shape == (2, 0)
    np.testing.assert_array_equal(K, np.eye(2))
    r, R, K = rank_split([[0.0, 1.0], [0.0, 0.0]])
    assert r == 1
    assert abs(R[0, 0]) == pytest.approx(1.0) and abs(K[0, 0]) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_rank_split_bases(n, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, n + 1))
    M = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
    rank, R, K = rank_split(M)
    assert rank == r
    np.testing.assert_allclose(R.T @ R, np.eye(r), atol=1e-12)
    np.testing.assert_allclose(K.T @ K, np.eye(n - r), atol=1e-12)
    assert np.linalg.norm(M @ K) <= 1e-10 * (1 + np.linalg.norm(M))
    # the range basis spans the column space
    assert np.linalg.norm(M - R @ (R.T @ M)) <= 1e-10 * (1 + np.linalg.norm(M))


def test_rank_split_reference_treats_noise_as_zero():
    noise = 1e-17 * np.ones((3, 3))
    assert rank_split(noise)[0] == 1
    assert rank_split(noise, reference=1.0)[0] == 0


def test_spectral_data():
    alpha, rho = spectral_data(np.diag([-1.0, -5.0]))
    assert alpha == pytest.approx(-1.0) and rho == pytest.approx(5.0)
