import itertools

import numpy as np
import pytest

from mdspir import array_code as ac
from mdspir import linalg
from mdspir.cli import random_quota
from mdspir.embedding import extension
from mdspir.field import GF


def load(data_dir, name):
    return ac.parse_generator((data_dir / name).read_text())


def test_grs_examples():
    G = ac.grs_generator(5, 3, GF(8), "plain")
    assert G.shape == (3, 5)
    assert ac.is_mds_symbol(GF(8), G)
    assert np.array_equal(G[0], [1] * 5)
    I = ac.trivial_generator(4, 4, GF(2))
    assert np.array_equal(I, np.eye(4))
    D = ac.grs_generator(5, 3, GF(4), "doubly_extended")
    assert ac.is_mds_symbol(GF(4), D)
    assert ac.is_mds_symbol(GF(4), ac.grs_generator(5, 3, GF(4), "extended"))


def test_grs_length_limits():
    with pytest.raises(ac.CodeError):
        ac.grs_generator(5, 3, GF(4), "plain")
    with pytest.raises(ac.CodeError):
        ac.grs_generator(7, 3, GF(4), "doubly_extended")
    assert ac.max_length("extended", 4) == 5


@pytest.mark.parametrize("length,dim", [(4, 1), (4, 3), (4, 4), (6, 5)])
def test_trivial_codes_are_mds(length, dim):
    G = ac.trivial_generator(length, dim, GF(2))
    assert ac.is_mds_symbol(GF(2), G)


def test_expand_examples():
    one = ac.expand_to_array_code(np.array([[1]]), extension(2, 1))
    assert np.array_equal(one.matrix, [[1]])
    G8 = ac.expand_to_array_code(ac.grs_generator(5, 3, GF(8)), extension(2, 3))
    assert G8.matrix.shape == (9, 15)
    assert ac.check_mds(G8).passed and ac.check_mds(G8).checked == 10
    G4 = ac.expand_to_array_code(ac.grs_generator(5, 3, GF(4), "doubly_extended"), extension(2, 2))
    assert G4.matrix.shape == (6, 10)
    assert ac.check_mds(G4).passed


def test_lift_keeps_mds():
    G = ac.build_array_code(5, 3, 2, 2)
    L = ac.lift_array_code(G, 3)
    assert L.ell == 6 and ac.check_mds(L).passed


def test_repeated_thick_columns_fail():
    G = ac.build_array_code(4, 2, 2, 2)
    M = G.matrix.copy()
    M[:, 2:4] = M[:, 0:2]
    bad = ac.BlockGenerator(G.field, 4, 2, 2, M)
    rep = ac.check_mds(bad)
    assert not rep.passed and (0, 1) in rep.violations


def test_printed_matrices(data_dir):
    g1 = load(data_dir, "g1_5_3_3.txt")
    g2 = load(data_dir, "g2_5_3_2.txt")
    assert (g1.dim, g1.length, g2.dim, g2.length) == (9, 15, 6, 10)
    assert ac.check_mds(g2).passed
    # printed information sets, 0-based
    assert linalg.rank(GF(2), g1.matrix[:, [0, 3, 6, 9, 10, 11, 12, 13, 14]]) == 9
    assert linalg.rank(GF(2), g2.matrix[:, range(6)]) == 6
    # the printed first matrix fails on these thick-column triples
    assert ac.check_mds(g1).violations == ((0, 1, 2), (0, 2, 3), (0, 2, 4), (1, 2, 4))


def test_recovery_on_printed_matrices(data_dir):
    g1 = load(data_dir, "g1_5_3_3.txt")
    a = ac.find_recovery_arrangement(g1, (1, 1, 1, 3, 3))
    assert a.quota == (1, 1, 1, 3, 3)
    assert linalg.rank(GF(2), g1.matrix[:, a.columns(3)]) == 9
    g2 = load(data_dir, "g2_5_3_2.txt")
    a = ac.find_recovery_arrangement(g2, (2, 2, 2, 0, 0))
    assert a.columns(2) == [0, 1, 2, 3, 4, 5]


def test_full_block_quota():
    G = ac.build_array_code(5, 3, 3, 2)
    for subset in itertools.combinations(range(5), 3):
        quota = [3 if i in subset else 0 for i in range(5)]
        a = ac.find_recovery_arrangement(G, quota)
        assert a.subsets == tuple((0, 1, 2) if i in subset else () for i in range(5))


def test_brute_force_examples(data_dir):
    G = ac.expand_to_array_code(ac.grs_generator(3, 2, GF(4)), extension(2, 2))
    a = ac.brute_force_arrangement(G, (2, 1, 1))
    assert a is not None and linalg.rank(GF(2), G.matrix[:, a.columns(2)]) == 4
    g1 = load(data_dir, "g1_5_3_3.txt")
    assert ac.brute_force_arrangement(g1, (3, 3, 3, 0, 0)) is None
    with pytest.raises(ac.ArrangementError):
        ac.find_recovery_arrangement(g1, (3, 3, 3, 0, 0))


def test_quota_validation():
    G = ac.build_array_code(4, 2, 2, 2)
    for bad in [(1, 1, 1), (3, 1, 0, 0), (1, 1, 1, 0), (-1, 2, 2, 1)]:
        with pytest.raises(ValueError):
            ac.find_recovery_arrangement(G, bad)


def test_permute_blocks():
    G = ac.build_array_code(5, 3, 2, 2)
    ident = ac.RecoveryArrangement(((0, 1), (0, 1), (0, 1), (), ()))
    assert ac.permute_blocks(G, ident) == G
    swap = ac.RecoveryArrangement(((0, 1), (0, 1), (1,), (0,), ()))
    P = ac.permute_blocks(G, swap)
    assert np.array_equal(P.matrix[:, 4], G.matrix[:, 5])
    assert np.array_equal(P.matrix[:, 5], G.matrix[:, 4])
    assert np.array_equal(P.matrix[:, :4], G.matrix[:, :4])
    assert np.array_equal(P.matrix[:, 6:], G.matrix[:, 6:])


def test_normal_form_after_permutation(rng):
    G = ac.build_array_code(6, 3, 2, 3)
    for _ in range(20):
        quota = random_quota(6, 3, 2, rng)
        P = ac.permute_blocks(G, ac.find_recovery_arrangement(G, quota))
        assert ac.is_normal_form(P, quota)


def test_recover_full_codeword(rng):
    G = ac.build_array_code(5, 3, 2, 2)
    u = G.field.random(6, rng)
    c = G.encode(u)
    pos = ac.find_recovery_arrangement(G, (2, 1, 1, 1, 1)).columns(2)
    assert np.array_equal(ac.recover_full_codeword(G, pos, c[pos]), c)
    assert not ac.recover_full_codeword(G, pos, np.zeros(6, dtype=np.int64)).any()
    R = ac.recovery_matrix(G, pos, range(10))
    assert np.array_equal(linalg.matmul(G.field, c[pos], R), c)
    extra = next(j for j in range(10) if j not in pos)
    with pytest.raises(ac.CodeError):
        ac.recover_full_codeword(G, pos + [extra], np.append(c[pos], 1 - c[extra]))


def test_code_recipes():
    assert ac.code_recipe(5, 3, 3, 2).describe().startswith("plain GRS [5,3] over GF(2^3)")
    assert ac.code_recipe(5, 3, 2, 2).mode == "extended"
    assert ac.code_recipe(6, 3, 1, 4).mode == "doubly_extended"
    assert ac.code_recipe(4, 1, 3, 2).describe() == "repetition code [4,1] over GF(2) lifted x3"
    assert ac.code_recipe(4, 3, 1, 2).describe() == "single-parity code [4,3] over GF(2)"
    assert ac.code_recipe(4, 2, 1, 2) is None
    with pytest.raises(ac.CodeError):
        ac.build_array_code(4, 2, 1, 2)


def test_generator_text_roundtrip():
    G = ac.build_array_code(5, 3, 2, 3)
    assert ac.parse_generator(ac.format_generator(G)) == G
    with pytest.raises(ac.CodeError):
        ac.parse_generator("5 3 2\n1 0")
