"""Pure-numpy versions of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np


def rref(A, add, mul, neg, inv, pivot_cols):
    rows, cols = A.shape
    pivot_cols = min(pivot_cols, cols)
    r = 0
    pivots = []
    for c in range(pivot_cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv], c:] = A[[piv, r], c:]
        s = inv[A[r, c]]
        if s != 1:
            A[r, c:] = mul[s, A[r, c:]]
        f = A[:, c].copy()
        f[r] = 0
        idx = np.flatnonzero(f)
        if idx.size:
            prow = A[r, c:]
            A[idx, c:] = add[A[idx, c:], mul[neg[f[idx]][:, None], prow[None, :]]]
        pivots.append(c)
        r += 1
    return pivots


def matmul(A, B, add, mul):
    n, k = A.shape
    if B.shape[0] != k:
        raise ValueError("inner dimensions differ")
    out = np.zeros((n, B.shape[1]), dtype=np.int64)
    for l in range(k):
        col = A[:, l]
        if not col.any():
            continue
        out = add[out, mul[col[:, None], B[l][None, :]]]
    return out


def gf2_batch_rank(rows, ncols):
    if ncols > 64:
        raise ValueError("at most 64 columns")
    R = np.array(rows, dtype=np.uint64)
    batch, n = R.shape
    rank = np.zeros(batch, dtype=np.int64)
    positions = np.arange(n)[None, :]
    for c in range(ncols):
        bit = np.uint64(1) << np.uint64(c)
        has = (R & bit) != 0
        eligible = has & (positions >= rank[:, None])
        found = eligible.any(axis=1)
        if not found.any():
            continue
        sel = np.flatnonzero(found)
        piv = eligible[sel].argmax(axis=1)
        rk = rank[sel]
        upper = R[sel, rk].copy()
        R[sel, rk] = R[sel, piv]
        R[sel, piv] = upper
        prow = R[sel, rk]
        below = ((R[sel] & bit) != 0) & (positions > rk[:, None])
        R[sel] ^= np.where(below, prow[:, None], np.uint64(0))
        rank[sel] += 1
    return rank


def batch_rank(A, add, mul, neg, inv):
    out = np.zeros(A.shape[0], dtype=np.int64)
    for b in range(A.shape[0]):
        work = np.array(A[b], dtype=np.int64)
        out[b] = len(rref(work, add, mul, neg, inv, work.shape[1]))
    return out
