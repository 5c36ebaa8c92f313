"""Dense matrix algebra over GF(q).

Matrices are 2-D ``int64`` numpy arrays of element codes, always paired with
the :class:`~mdspir.field.GaloisField` they live in.  Fields of order <= 256
run on the table kernels selected in :mod:`mdspir._backend`; larger fields use
vectorised field operations directly.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _backend
from .field import GaloisField


class LinAlgError(ArithmeticError):
    pass


class Singular(LinAlgError):
    pass


class NoSolution(LinAlgError):
    pass


class NotUnique(LinAlgError):
    pass


def asmat(A) -> np.ndarray:
    return np.ascontiguousarray(A, dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def _generic_rref(gf: GaloisField, A: np.ndarray, pivot_cols: int) -> list[int]:
    rows, _ = A.shape
    r = 0
    pivots = []
    for c in range(min(pivot_cols, A.shape[1])):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv], c:] = A[[piv, r], c:]
        A[r, c:] = gf.mul(gf.inv(int(A[r, c])), A[r, c:])
        f = A[:, c].copy()
        f[r] = 0
        idx = np.flatnonzero(f)
        if idx.size:
            A[idx, c:] = gf.sub(A[idx, c:], gf.mul(f[idx][:, None], A[r, c:][None, :]))
        pivots.append(c)
        r += 1
    return pivots


def rref(gf: GaloisField, A, pivot_cols: int | None = None, kernels=None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (Gauss-Jordan).

    Pivots are only searched in the first ``pivot_cols`` columns; row
    operations still act on every column, which is how augmented systems
    are reduced.
    """
    R = np.array(A, dtype=np.int64, order="C")
    if R.ndim != 2:
        raise ValueError("expected a matrix")
    pc = R.shape[1] if pivot_cols is None else pivot_cols
    t = gf.tables
    if t is None:
        return R, _generic_rref(gf, R, pc)
    k = kernels or _backend.kernels
    return R, list(k.rref(R, t.add, t.mul, t.neg, t.inv, pc))


def rank(gf: GaloisField, A) -> int:
    A = asmat(A)
    if A.size == 0:
        return 0
    return len(rref(gf, A)[1])


def matmul(gf: GaloisField, A, B, kernels=None) -> np.ndarray:
    A, B = asmat(A), asmat(B)
    if A.ndim == 1 or B.ndim == 1:
        a2 = A[None, :] if A.ndim == 1 else A
        b2 = B[:, None] if B.ndim == 1 else B
        out = matmul(gf, a2, b2, kernels)
        if A.ndim == 1:
            out = out[0]
        if B.ndim == 1:
            out = out[..., 0]
        return out
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    if A.shape[1] == 0:
        return zeros(A.shape[0], B.shape[1])
    bound = (gf.p - 1) ** 2 * A.shape[1]
    if gf.m == 1 and bound < 2**52:
        # exact in floating point, so BLAS does the heavy lifting
        ft = np.float32 if bound < 2**24 else np.float64
        out = (A.astype(ft) @ B.astype(ft)).astype(np.int64)
        if gf.p == 2:
            out &= 1
        else:
            out %= gf.p
        return out
    t = gf.tables
    if t is not None:
        k = kernels or _backend.kernels
        return k.matmul(A, B, t.add, t.mul)
    out = zeros(A.shape[0], B.shape[1])
    for l in range(A.shape[1]):
        out = gf.add(out, gf.mul(A[:, l][:, None], B[l][None, :]))
    return out


def solve(gf: GaloisField, A, y) -> np.ndarray:
    """The unique x with ``A @ x == y`` (y may be a vector or a matrix)."""
    A = asmat(A)
    y = asmat(y)
    vec = y.ndim == 1
    Y = y[:, None] if vec else y
    if Y.shape[0] != A.shape[0]:
        raise ValueError("row count mismatch")
    cols = A.shape[1]
    R, piv = rref(gf, np.hstack([A, Y]), pivot_cols=cols)
    r = len(piv)
    if np.any(R[r:, cols:]):
        raise NoSolution("inconsistent linear system")
    if r < cols:
        raise NotUnique(f"column rank {r} < {cols}")
    x = R[:cols, cols:]
    return x[:, 0] if vec else x


def invert(gf: GaloisField, A) -> np.ndarray:
    A = asmat(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("invert needs a square matrix")
    R, piv = rref(gf, np.hstack([A, identity(n)]), pivot_cols=n)
    if len(piv) < n:
        raise Singular("matrix is singular")
    return np.ascontiguousarray(R[:, n:])


def det(gf: GaloisField, A) -> int:
    """Determinant by elimination (used for small symbol-level minors)."""
    A = np.array(A, dtype=np.int64)
    n = A.shape[0]
    acc = 1
    for c in range(n):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            acc = gf.neg(acc)
        acc = gf.mul(acc, int(A[c, c]))
        inv = gf.inv(int(A[c, c]))
        for i in range(c + 1, n):
            if A[i, c]:
                f = gf.mul(int(A[i, c]), inv)
                A[i, c:] = gf.sub(A[i, c:], gf.mul(f, A[c, c:]))
    return int(acc)


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """0/1 matrix P with ``(c @ P)[perm[i]] == c[i]``."""
    perm = [int(x) for x in perm]
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    P = zeros(n, n)
    P[np.arange(n), perm] = 1
    return P


def pack_gf2_rows(M: np.ndarray) -> np.ndarray:
    """Bit-pack the last axis (<= 64 entries) of a 0/1 array into uint64."""
    n = M.shape[-1]
    if n > 64:
        raise ValueError("at most 64 columns")
    shifts = np.arange(n, dtype=np.uint64)
    return (M.astype(np.uint64) << shifts).sum(axis=-1, dtype=np.uint64)


def batch_rank(gf: GaloisField, A: np.ndarray, kernels=None) -> np.ndarray:
    """Ranks of a stack of matrices with shape (batch, rows, cols)."""
    A = np.ascontiguousarray(A, dtype=np.int64)
    k = kernels or _backend.kernels
    if gf.order == 2 and A.shape[2] <= 64:
        return k.gf2_batch_rank(np.ascontiguousarray(pack_gf2_rows(A)), A.shape[2])
    t = gf.tables
    if t is not None:
        return k.batch_rank(A, t.add, t.mul, t.neg, t.inv)
    return np.array([rank(gf, a) for a in A], dtype=np.int64)


def sample_invertible(gf: GaloisField, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of GL(n, q) by rejection sampling uniform matrices."""
    return sample_invertible_batch(gf, n, 1, rng, chunk=1)[0][0]


def sample_invertible_batch(
    gf: GaloisField, n: int, count: int, rng: np.random.Generator, chunk: int = 4096
) -> tuple[np.ndarray, int]:
    """``count`` independent uniform invertible matrices plus the number of draws."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty((count, n, n), dtype=np.int64)
    filled = 0
    draws = 0
    dtype = np.uint8 if gf.order <= 256 else np.int64
    while filled < count:
        size = chunk if chunk > 1 else 1
        cand = rng.integers(0, gf.order, size=(size, n, n), dtype=dtype).astype(np.int64)
        if size == 1:
            ok = np.array([rank(gf, cand[0]) == n])
        else:
            ok = batch_rank(gf, cand) == n
        hits = np.flatnonzero(ok)
        take = min(len(hits), count - filled)
        out[filled : filled + take] = cand[hits[:take]]
        filled += take
        # candidates after the last one used were never needed
        draws += int(hits[take - 1]) + 1 if filled == count and take else size
    return out, draws


def enumerate_invertible(gf: GaloisField, n: int) -> np.ndarray:
    """All of GL(n, q), in lexicographic order of the row-major entries."""
    total = gf.order ** (n * n)
    if total > 1 << 20:
        raise ValueError("too many matrices to enumerate")
    idx = np.arange(total, dtype=np.int64)
    digits = np.empty((total, n * n), dtype=np.int64)
    for pos in range(n * n - 1, -1, -1):
        digits[:, pos] = idx % gf.order
        idx //= gf.order
    mats = digits.reshape(total, n, n)
    return mats[batch_rank(gf, mats) == n]
