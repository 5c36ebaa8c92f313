import itertools

import numpy as np
import pytest

from mdspir import linalg
from mdspir.embedding import FieldExtension, companion_matrix, extension, minimal_polynomial, phi
from mdspir.field import GF, FieldError, GaloisField


def test_companion_examples():
    gf2 = GF(2)
    assert np.array_equal(companion_matrix(gf2, (1, 1, 1)), [[0, 1], [1, 1]])
    gf7 = GF(7)
    assert np.array_equal(companion_matrix(gf7, (3, 1)), [[4]])  # x + 3 -> [-3]
    C = companion_matrix(gf2, (1, 1, 0, 1))
    assert np.array_equal(C, [[0, 0, 1], [1, 0, 1], [0, 1, 0]])
    with pytest.raises(FieldError):
        companion_matrix(gf2, (1, 1, 0))


def test_minimal_polynomials():
    assert minimal_polynomial(extension(2, 2)) == (1, 1, 1)
    assert minimal_polynomial(extension(2, 3)) == (1, 1, 0, 1)
    # degree ell, monic, with alpha as a root
    for q, ell in [(3, 2), (4, 2), (2, 5), (5, 2), (4, 3)]:
        ext = extension(q, ell)
        mp = ext.minimal_polynomial
        assert len(mp) == ell + 1 and mp[-1] == 1
        E = ext.field
        acc = 0
        for c in reversed(mp):
            acc = E.add(E.mul(acc, ext.alpha), int(ext.embed(c)))
        assert acc == 0


@pytest.mark.parametrize("q,ell", [(2, 2), (2, 3), (3, 2), (4, 2), (2, 4)])
def test_phi_examples(q, ell):
    ext = extension(q, ell)
    assert not phi(ext, 0).any()
    assert np.array_equal(phi(ext, 1), linalg.identity(ell))
    assert np.array_equal(phi(ext, ext.alpha), ext.companion)


def test_coordinates_roundtrip():
    ext = extension(4, 3)
    codes = ext.field.elements()
    U = ext.coordinates(codes)
    assert U.shape == (64, 3)
    assert [ext.from_coordinates(u) for u in U] == list(codes)
    for b in range(4):
        assert ext.restrict(int(ext.embed(b))) == b


def test_phi_matrix_blocks():
    ext = extension(2, 2)
    A = np.array([[1, 2], [3, 0]])
    B = ext.phi_matrix(A)
    assert B.shape == (4, 4)
    assert np.array_equal(B[:2, 2:], ext.phi(2))
    assert np.array_equal(B[2:, :2], ext.phi(3))


def test_custom_base_modulus():
    # the embedding works for any base modulus, not only the default one
    base = GaloisField(3, 2, (2, 2, 1))  # x^2 + 2x + 2 is primitive over GF(3)
    ext = FieldExtension(base, 2)
    t = ext.phi_table
    K, E = base, ext.field
    for a, b in itertools.product(range(0, 81, 7), repeat=2):
        assert np.array_equal(t[E.add(a, b)], K.add(t[a], t[b]))
        assert np.array_equal(t[E.mul(a, b)], linalg.matmul(K, t[a], t[b]))
