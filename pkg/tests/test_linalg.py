import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mdspir import linalg
from mdspir.field import GF


def _full_col_rank(gf, rows, cols, rng):
    while True:
        A = gf.random((rows, cols), rng)
        if linalg.rank(gf, A) == cols:
            return A


def test_rank_examples(kernels):
    gf = GF(2)
    assert linalg.rank(gf, linalg.identity(5)) == 5
    assert linalg.rank(gf, linalg.zeros(3, 4)) == 0
    assert linalg.rank(gf, [[1, 1], [1, 1]]) == 1


@pytest.mark.parametrize("q", [2, 3, 4, 7, 16, 512])
def test_rank_transpose_and_inverse(q, kernels, rng):
    gf = GF(q)
    for _ in range(10):
        A = gf.random((5, 7), rng)
        assert linalg.rank(gf, A) == linalg.rank(gf, A.T)
        S = linalg.sample_invertible(gf, 6, rng)
        Si = linalg.invert(gf, S)
        assert np.array_equal(linalg.matmul(gf, Si, S), linalg.identity(6))
        assert np.array_equal(linalg.matmul(gf, S, Si), linalg.identity(6))


@pytest.mark.parametrize("q", [2, 5, 9, 1024])
def test_solve_roundtrip(q, kernels, rng):
    gf = GF(q)
    A = _full_col_rank(gf, 6, 4, rng)
    x0 = gf.random(4, rng)
    assert np.array_equal(linalg.solve(gf, A, linalg.matmul(gf, A, x0)), x0)
    X0 = gf.random((4, 3), rng)
    assert np.array_equal(linalg.solve(gf, A, linalg.matmul(gf, A, X0)), X0)


def test_solve_examples(kernels):
    gf = GF(2)
    assert np.array_equal(linalg.solve(gf, linalg.identity(3), [1, 0, 1]), [1, 0, 1])
    S = np.array([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
    assert np.array_equal(linalg.solve(gf, S, [0, 0, 0]), [0, 0, 0])
    with pytest.raises(linalg.NoSolution):
        linalg.solve(gf, [[1, 1], [1, 1]], [0, 1])
    with pytest.raises(linalg.NotUnique):
        linalg.solve(gf, [[1, 1], [1, 1]], [1, 1])


def test_invert_examples(kernels):
    gf = GF(2)
    assert np.array_equal(linalg.invert(gf, linalg.identity(4)), linalg.identity(4))
    P = linalg.permutation_matrix([2, 0, 3, 1])
    assert np.array_equal(linalg.invert(gf, P), P.T)
    A = np.array([[1, 1], [0, 1]])
    assert np.array_equal(linalg.invert(gf, A), A)
    with pytest.raises(linalg.Singular):
        linalg.invert(gf, [[1, 1], [1, 1]])


def test_permutation_matrix():
    assert np.array_equal(linalg.permutation_matrix([0, 1]), np.eye(2))
    assert np.array_equal(linalg.permutation_matrix([1, 0]), [[0, 1], [1, 0]])
    # 1 -> 2 -> 3 -> 1 sends (c1, c2, c3) to (c3, c1, c2)
    c = np.array([10, 20, 30])
    assert np.array_equal(c @ linalg.permutation_matrix([1, 2, 0]), [30, 10, 20])
    with pytest.raises(ValueError):
        linalg.permutation_matrix([0, 0])


def test_det(kernels):
    gf = GF(7)
    A = np.array([[2, 1], [3, 4]])
    assert linalg.det(gf, A) == (2 * 4 - 3) % 7
    assert linalg.det(gf, [[1, 2], [2, 4]]) == 0


def test_gl32_enumeration_and_1x1_sampling(rng):
    gf = GF(2)
    gl = linalg.enumerate_invertible(gf, 3)
    assert len(gl) == 168
    assert len(np.unique(gl.reshape(168, -1), axis=0)) == 168
    for _ in range(20):
        assert np.array_equal(linalg.sample_invertible(gf, 1, rng), [[1]])


def test_sampling_rank_and_uniformity():
    gf = GF(2)
    rng = np.random.default_rng(7)
    mats, draws = linalg.sample_invertible_batch(gf, 3, 100_000, rng)
    assert np.all(linalg.batch_rank(gf, mats) == 3)
    codes = linalg.pack_gf2_rows(mats.reshape(len(mats), 9)).astype(np.int64)
    _, counts = np.unique(codes, return_counts=True)
    assert len(counts) == 168
    chi = stats.chisquare(counts)
    assert chi.pvalue > 0.01


def test_acceptance_rate_gf2():
    gf = GF(2)
    rng = np.random.default_rng(3)
    count = 20_000
    _, draws = linalg.sample_invertible_batch(gf, 20, count, rng)
    p = count / draws
    limit = np.prod([1 - 2.0**-i for i in range(1, 200)])
    sigma = np.sqrt(limit * (1 - limit) / draws)
    assert abs(p - limit) < 3 * sigma + 1e-3


def test_matmul_paths_agree(rng):
    # the BLAS path for prime fields must equal plain integer arithmetic
    for q in (2, 3, 7, 251, 65521):
        gf = GF(q)
        A, B = gf.random((13, 40), rng), gf.random((40, 9), rng)
        assert np.array_equal(linalg.matmul(gf, A, B), (A @ B) % q)
    gf = GF(1024)
    A, B = gf.random((4, 5), rng), gf.random((5, 3), rng)
    expect = np.zeros((4, 3), dtype=np.int64)
    for i, j, k in itertools.product(range(4), range(3), range(5)):
        expect[i, j] = gf.add(expect[i, j], gf.mul(int(A[i, k]), int(B[k, j])))
    assert np.array_equal(linalg.matmul(gf, A, B), expect)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 8, 13]), st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**31))
def test_rref_is_reduced(q, r, c, seed):
    gf = GF(q)
    A = gf.random((r, c), np.random.default_rng(seed))
    R, piv = linalg.rref(gf, A)
    assert len(piv) == linalg.rank(gf, A.T)
    for i, pc in enumerate(piv):
        col = R[:, pc]
        assert col[i] == 1 and np.count_nonzero(col) == 1
    assert not R[len(piv):].any()
