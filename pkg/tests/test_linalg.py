import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sheafcoh import linalg

P = 32003


def test_rank_identity():
    assert linalg.rank(np.eye(3, dtype=np.int64), P) == 3


def test_rank_zero():
    assert linalg.rank(np.zeros((2, 5), dtype=np.int64), P) == 0


def test_rank_dependent_rows():
    assert linalg.rank(np.array([[1, 2], [2, 4]]), P) == 1


def test_kernel_identity_empty():
    B = linalg.kernel_basis(np.eye(4, dtype=np.int64), P)
    assert B.shape == (4, 0)


def test_kernel_zero_is_identity():
    B = linalg.kernel_basis(np.zeros((2, 3), dtype=np.int64), P)
    assert np.array_equal(B, np.eye(3, dtype=np.int64))


def test_kernel_single_relation():
    A = np.array([[1, 1, 0], [0, 0, 1]])
    B = linalg.kernel_basis(A, P)
    assert B.shape == (3, 1)
    assert list(B[:, 0]) == [P - 1, 1, 0]
    assert not np.any(linalg.matmul(A, B, P))


def test_solve_identity():
    b = np.array([3, 5, 7])
    x = linalg.solve(np.eye(3, dtype=np.int64), b, P)
    assert np.array_equal(x, b)


def test_solve_zero():
    x = linalg.solve(np.zeros((2, 2), dtype=np.int64), np.zeros(2), P)
    assert np.array_equal(x, np.zeros(2))


def test_solve_inverse_mod_5():
    x = linalg.solve(np.array([[2]]), np.array([1]), 5)
    assert list(x) == [3]


def test_solve_inconsistent():
    assert linalg.solve(np.zeros((1, 1), dtype=np.int64), np.array([1]), P) is None


def test_coker_zero_matrix():
    assert linalg.coker_basis(np.zeros((3, 2), dtype=np.int64), P) == [0, 1, 2]


def test_coker_identity_empty():
    assert linalg.coker_basis(np.eye(3, dtype=np.int64), P) == []


def test_coker_one_dimensional_quotient():
    assert len(linalg.coker_basis(np.array([[1], [1]]), P)) == 1


matrices = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 6).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, P - 1), min_size=n,
                                    max_size=n), min_size=m, max_size=m)))


@given(matrices)
@settings(max_examples=120, deadline=None)
def test_rank_equals_rank_of_transpose(rows):
    A = np.array(rows, dtype=np.int64)
    assert linalg.rank(A, P) == linalg.rank(A.T, P)


@given(matrices)
@settings(max_examples=120, deadline=None)
def test_kernel_remultiplication_is_zero(rows):
    A = np.array(rows, dtype=np.int64)
    B = linalg.kernel_basis(A, P)
    assert B.shape[1] == A.shape[1] - linalg.rank(A, P)
    if B.size:
        assert not np.any(linalg.matmul(A, B, P))


@given(matrices)
@settings(max_examples=100, deadline=None)
def test_coker_and_pivot_rows_span(rows):
    A = np.array(rows, dtype=np.int64)
    quot = linalg.coker_basis(A, P)
    pivots = linalg.column_space_pivot_rows(A, P)
    assert sorted(quot + pivots) == list(range(A.shape[0]))
    # image basis plus the quotient representatives span the target
    m = A.shape[0]
    extra = np.zeros((m, len(quot)), dtype=np.int64)
    for k, r in enumerate(quot):
        extra[r, k] = 1
    full = np.concatenate([A, extra], axis=1)
    assert linalg.rank(full, P) == m


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_reducer_kills_column_space(rows):
    A = np.array(rows, dtype=np.int64)
    red = linalg.Reducer(A, P)
    assert not np.any(red.reduce(A))


def test_solve_matrix_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.integers(0, P, (4, 3))
        X = rng.integers(0, P, (3, 2))
        B = linalg.matmul(A, X, P)
        Y = linalg.solve_matrix(A, B, P)
        assert Y is not None
        assert np.array_equal(linalg.matmul(A, Y, P), B)
