"""The compiled and numpy kernels must agree bit for bit."""

import numpy as np
import pytest

from mdspir import _backend, linalg
from mdspir.field import GF

BACKENDS = _backend.available()
pytestmark = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")


@pytest.mark.parametrize("q", [2, 3, 4, 16, 256])
def test_backends_agree(q):
    gf = GF(q)
    t = gf.tables
    rng = np.random.default_rng(q)
    ks = [_backend.load(n) for n in BACKENDS]
    for _ in range(20):
        r, c = rng.integers(1, 12, size=2)
        A = gf.random((r, c), rng)
        out = []
        for k in ks:
            R = A.copy()
            piv = list(k.rref(R, t.add, t.mul, t.neg, t.inv, c))
            out.append((R, piv))
        assert np.array_equal(out[0][0], out[1][0]) and out[0][1] == out[1][1]
        B = gf.random((c, 5), rng)
        m = [k.matmul(A, B, t.add, t.mul) for k in ks]
        assert np.array_equal(m[0], m[1])
    stack = gf.random((300, 6, 8), rng)
    ranks = [k.batch_rank(stack, t.add, t.mul, t.neg, t.inv) for k in ks]
    assert np.array_equal(ranks[0], ranks[1])


def test_gf2_bitpacked_rank_matches_generic():
    gf = GF(2)
    rng = np.random.default_rng(0)
    stack = gf.random((500, 10, 40), rng)
    packed = linalg.pack_gf2_rows(stack)
    t = gf.tables
    for name in BACKENDS:
        k = _backend.load(name)
        fast = k.gf2_batch_rank(np.ascontiguousarray(packed), 40)
        slow = k.batch_rank(stack, t.add, t.mul, t.neg, t.inv)
        assert np.array_equal(fast, slow)


def test_env_override(monkeypatch):
    import importlib
    monkeypatch.setenv("MDSPIR_BACKEND", "python")
    name, _ = _backend._select()
    assert name == "python"
    importlib.reload(_backend)  # restore the module-level choice for other tests
    monkeypatch.delenv("MDSPIR_BACKEND")
    importlib.reload(_backend)
