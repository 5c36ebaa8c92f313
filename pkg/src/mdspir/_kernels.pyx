# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for small-field linear algebra.

Every routine works on integer element codes and takes the field's full
add/mul tables, so one kernel serves GF(q) for any q <= 256.  Signatures
match ``_pykernels`` exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


def rref(int64_t[:, ::1] A, const int64_t[:, ::1] add, const int64_t[:, ::1] mul,
         const int64_t[::1] neg, const int64_t[::1] inv, Py_ssize_t pivot_cols):
    cdef Py_ssize_t rows = A.shape[0], cols = A.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef int64_t s, f, tmp
    pivots = []
    if pivot_cols > cols:
        pivot_cols = cols
    for c in range(pivot_cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, cols):
                tmp = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = tmp
        s = inv[A[r, c]]
        if s != 1:
            for j in range(c, cols):
                A[r, j] = mul[s, A[r, j]]
        for i in range(rows):
            if i == r:
                continue
            f = A[i, c]
            if f != 0:
                f = neg[f]
                for j in range(c, cols):
                    if A[r, j] != 0:
                        A[i, j] = add[A[i, j], mul[f, A[r, j]]]
        pivots.append(c)
        r += 1
    return pivots


def matmul(const int64_t[:, ::1] A, const int64_t[:, ::1] B,
           const int64_t[:, ::1] add, const int64_t[:, ::1] mul):
    cdef Py_ssize_t n = A.shape[0], k = A.shape[1], m = B.shape[1]
    cdef Py_ssize_t i, l, j
    cdef int64_t a
    if B.shape[0] != k:
        raise ValueError("inner dimensions differ")
    out = np.zeros((n, m), dtype=np.int64)
    cdef int64_t[:, ::1] C = out
    for i in range(n):
        for l in range(k):
            a = A[i, l]
            if a == 0:
                continue
            for j in range(m):
                if B[l, j] != 0:
                    C[i, j] = add[C[i, j], mul[a, B[l, j]]]
    return out


def gf2_batch_rank(const uint64_t[:, ::1] rows, Py_ssize_t ncols):
    """Ranks of a batch of GF(2) matrices given as bit-packed rows (ncols <= 64)."""
    cdef Py_ssize_t batch = rows.shape[0], n = rows.shape[1]
    cdef Py_ssize_t b, c, i, r, piv
    cdef uint64_t bit, prow, tmp
    if ncols > 64:
        raise ValueError("at most 64 columns")
    out = np.zeros(batch, dtype=np.int64)
    cdef int64_t[::1] ranks = out
    buf = np.zeros(n, dtype=np.uint64)
    cdef uint64_t[::1] R = buf
    for b in range(batch):
        for i in range(n):
            R[i] = rows[b, i]
        r = 0
        for c in range(ncols):
            if r == n:
                break
            bit = (<uint64_t>1) << c
            piv = -1
            for i in range(r, n):
                if R[i] & bit:
                    piv = i
                    break
            if piv < 0:
                continue
            tmp = R[r]
            R[r] = R[piv]
            R[piv] = tmp
            prow = R[r]
            for i in range(r + 1, n):
                if R[i] & bit:
                    R[i] ^= prow
            r += 1
        ranks[b] = r
    return out


def batch_rank(const int64_t[:, :, ::1] A, const int64_t[:, ::1] add, const int64_t[:, ::1] mul,
               const int64_t[::1] neg, const int64_t[::1] inv):
    cdef Py_ssize_t batch = A.shape[0], b
    out = np.zeros(batch, dtype=np.int64)
    cdef int64_t[::1] ranks = out
    for b in range(batch):
        work = np.array(A[b], dtype=np.int64)
        ranks[b] = len(rref(work, add, mul, neg, inv, work.shape[1]))
    return out
