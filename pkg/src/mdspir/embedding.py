"""GF(q^l) as an l-dimensional extension of GF(q), and its matrix embedding.

The extension field uses the default modulus of GF(p^(a*l)) (q = p^a) and
the class of x as primitive element alpha.  The base field GF(q) is placed
inside it through a root of the base field's own modulus, so any base field
instance can be used.  ``phi`` sends an element u(alpha), written in the
power basis over GF(q), to u(C) where C is the companion matrix of the
minimal polynomial of alpha over GF(q).
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .field import FieldError, GaloisField, GF

Poly = tuple[int, ...]


def companion_matrix(base: GaloisField, poly: Sequence[int]) -> np.ndarray:
    """Companion matrix of a monic polynomial (coefficients lowest degree first).

    Ones on the subdiagonal, last column ``(-c_0, ..., -c_{l-1})``.
    """
    poly = [int(c) for c in poly]
    if len(poly) < 2:
        raise FieldError("companion matrix needs degree >= 1")
    if poly[-1] != 1:
        raise FieldError("polynomial must be monic")
    ell = len(poly) - 1
    C = linalg.zeros(ell, ell)
    for i in range(1, ell):
        C[i, i - 1] = 1
    C[:, ell - 1] = base.neg(np.asarray(poly[:-1], dtype=np.int64))
    return C


def poly_eval(field: GaloisField, poly: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = field.add(field.mul(acc, x), int(c))
    return acc


def _poly_mul(field: GaloisField, a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = field.add(out[i + j], field.mul(x, y))
    return out


class FieldExtension:
    """GF(q^ell) over a base GF(q)."""

    def __init__(self, base: GaloisField, ell: int):
        if ell < 1:
            raise FieldError("extension degree must be >= 1")
        self.base = base
        self.ell = ell
        self.field = GaloisField(base.p, base.m * ell)
        self._embed_base()

    def __repr__(self) -> str:
        return f"FieldExtension(GF({self.field.order}) over GF({self.base.order}))"

    @property
    def order(self) -> int:
        return self.field.order

    @property
    def alpha(self) -> int:
        return self.field.alpha

    def _embed_base(self) -> None:
        E, K = self.field, self.base
        # multiplicative generator of the copy of GF(q) inside E
        if K.order == 2:
            candidates = [1]
        else:
            beta = E.alpha_power((E.order - 1) // (K.order - 1))
            candidates = [E.power(beta, j) for j in range(K.order - 1)]
        for r in candidates:
            if poly_eval(E, K.modulus, r) == 0:
                self._root = r
                break
        else:  # pragma: no cover - the subfield always contains a root
            raise FieldError("base modulus has no root in the extension")
        codes = K.elements()
        psi = np.zeros(K.order, dtype=np.int64)
        rpow = [E.power(self._root, i) for i in range(K.m)]
        for code in codes:
            acc = 0
            for i, coef in enumerate(K.coeffs(int(code))):
                if coef:
                    acc = E.add(acc, E.mul(coef, rpow[i]))
            psi[code] = acc
        self._psi = psi
        self._psi_inv = {int(v): int(k) for k, v in enumerate(psi)}
        # GF(p)-basis {r^i alpha^j} of E, column (j*a + i)
        prime = GF(K.p)
        a = K.m
        B = linalg.zeros(E.m, E.m)
        for j in range(self.ell):
            aj = E.alpha_power(j)
            for i in range(a):
                B[:, j * a + i] = E.coeffs(E.mul(rpow[i], aj))
        self._basis_inv = linalg.invert(prime, B)
        self._prime = prime

    # -- maps between base field and subfield ----------------------------

    def embed(self, b):
        """Image of base-field elements inside the extension."""
        return self._psi[np.asarray(b, dtype=np.int64)]

    def restrict(self, e: int) -> int:
        """Inverse of :meth:`embed` for elements of the subfield."""
        try:
            return self._psi_inv[int(e)]
        except KeyError:
            raise FieldError(f"{e} does not lie in the base field") from None

    def coordinates(self, a) -> np.ndarray:
        """Coordinates over GF(q) in the basis 1, alpha, ..., alpha^(ell-1).

        Vectorised: input shape ``s`` gives output shape ``s + (ell,)``.
        """
        E, K = self.field, self.base
        arr = np.asarray(a, dtype=np.int64)
        flat = arr.reshape(-1)
        pw = np.asarray(E._pows, dtype=np.int64)
        digits = (flat[:, None] // pw) % E.p  # (count, E.m)
        z = linalg.matmul(self._prime, digits, self._basis_inv.T)  # (count, E.m)
        z = z.reshape(-1, self.ell, K.m)
        kp = np.asarray(K._pows, dtype=np.int64)
        u = (z * kp).sum(axis=-1)
        return u.reshape(arr.shape + (self.ell,))

    def from_coordinates(self, u: Sequence[int]) -> int:
        E = self.field
        acc = 0
        for j, c in enumerate(u):
            if c:
                acc = E.add(acc, E.mul(int(self._psi[int(c)]), E.alpha_power(j)))
        return acc

    # -- minimal polynomial, companion matrix, phi ------------------------

    @cached_property
    def minimal_polynomial(self) -> Poly:
        """Minimal polynomial of alpha over GF(q), monic, lowest degree first."""
        E = self.field
        q = self.base.order
        poly = [1]
        conj = E.alpha
        for _ in range(self.ell):
            poly = _poly_mul(E, poly, [E.neg(conj), 1])
            conj = E.power(conj, q)
        return tuple(self.restrict(c) for c in poly)

    @cached_property
    def companion(self) -> np.ndarray:
        return companion_matrix(self.base, self.minimal_polynomial)

    @cached_property
    def _companion_powers(self) -> np.ndarray:
        C = self.companion
        pows = [linalg.identity(self.ell)]
        for _ in range(1, self.ell):
            pows.append(linalg.matmul(self.base, pows[-1], C))
        return np.stack(pows)

    def phi(self, a: int) -> np.ndarray:
        """The ell x ell matrix over GF(q) representing ``a``."""
        u = self.coordinates(int(a))
        K = self.base
        M = linalg.zeros(self.ell, self.ell)
        for j in range(self.ell - 1, -1, -1):
            M = linalg.matmul(K, M, self.companion)
            M = K.add(M, K.mul(int(u[j]), linalg.identity(self.ell)))
        return M

    def phi_many(self, codes) -> np.ndarray:
        """phi of each code in a 1-D array, shape (len, ell, ell)."""
        K = self.base
        codes = np.asarray(codes, dtype=np.int64).reshape(-1)
        u = self.coordinates(codes)
        P = self._companion_powers
        out = np.zeros((len(codes), self.ell, self.ell), dtype=np.int64)
        for j in range(self.ell):
            out = K.add(out, K.mul(u[:, j][:, None, None], P[j][None, :, :]))
        return out

    @cached_property
    def phi_table(self) -> np.ndarray:
        """phi of every element, shape (order, ell, ell), indexed by code."""
        return self.phi_many(self.field.elements())

    def phi_matrix(self, A) -> np.ndarray:
        """Replace each symbol of a matrix over GF(q^ell) by its phi-image."""
        A = np.asarray(A, dtype=np.int64)
        r, c = A.shape
        uniq, where = np.unique(A, return_inverse=True)
        blocks = self.phi_many(uniq)[where.reshape(r, c)]  # (r, c, ell, ell)
        return np.ascontiguousarray(blocks.transpose(0, 2, 1, 3).reshape(r * self.ell, c * self.ell))


@lru_cache(maxsize=None)
def extension(q: int, ell: int) -> FieldExtension:
    return FieldExtension(GF(q), ell)


def minimal_polynomial(ext: FieldExtension) -> Poly:
    return ext.minimal_polynomial


def phi(ext: FieldExtension, a: int) -> np.ndarray:
    return ext.phi(a)
