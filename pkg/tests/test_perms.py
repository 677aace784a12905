import itertools

import numpy as np
import pytest

from ptfree.errors import CapacityError, ContractError, DomainError
from ptfree.perms import (
    BlockShape,
    Compose,
    FullTranspose,
    Identity,
    Inverse,
    PartialTranspose,
    apply,
    fixed_point_count,
    overlap_triple_count,
    phi,
    phi_inverse,
)

G = PartialTranspose.of


def shapes_up_to(M_max):
    for M in range(1, M_max + 1):
        for b in range(1, M + 1):
            if M % b == 0:
                yield BlockShape(b, M // b)


def test_phi_examples():
    s = BlockShape(2, 3)
    assert phi(s, 1, 1) == (1, 1, 1, 1)
    assert phi(s, 4, 6) == (2, 1, 2, 3)
    assert phi(BlockShape(1, 5), 3, 2) == (1, 3, 1, 2)
    assert phi_inverse(s, (2, 1, 2, 3)) == (4, 6)
    assert phi_inverse(s, (1, 1, 1, 1)) == (1, 1)


def test_phi_round_trip():
    for s in shapes_up_to(12):
        for i, j in itertools.product(range(1, s.M + 1), repeat=2):
            c = phi(s, i, j)
            assert phi_inverse(s, c) == (i, j)
            assert phi(s, *phi_inverse(s, c)) == c


def test_phi_domain_errors():
    s = BlockShape(2, 3)
    with pytest.raises(DomainError):
        phi(s, 0, 1)
    with pytest.raises(DomainError):
        phi(s, 1, 7)
    with pytest.raises(DomainError):
        phi_inverse(s, (3, 1, 1, 1))
    with pytest.raises(DomainError):
        BlockShape(0, 2)


def test_apply_examples():
    d = 4
    for i, j in itertools.product(range(1, d + 1), repeat=2):
        assert apply(G(1, 1, d), (i, j)) == (j, i)
        assert apply(G(1, d, 1), (i, j)) == (i, j)
    assert G(-1, 2, 2)(1, 3) == (3, 1)
    with pytest.raises(DomainError):
        G(1, 2, 2)(5, 1)


def test_partial_transpose_swaps_coordinates():
    for s in shapes_up_to(12):
        for i, j in itertools.product(range(1, s.M + 1), repeat=2):
            a1, a2, am1, am2 = phi(s, i, j)
            assert phi(s, *PartialTranspose(s, 1)(i, j)) == (a1, am2, am1, a2)
            assert phi(s, *PartialTranspose(s, -1)(i, j)) == (am1, a2, a1, am2)


def test_bijection_and_involution_up_to_64():
    for s in shapes_up_to(64):
        for theta in (1, -1):
            p = PartialTranspose(s, theta)
            t = p.table()
            assert np.array_equal(np.sort(t), np.arange(s.M**2))
            assert np.array_equal(t[t], np.arange(s.M**2))


def test_table_matches_pointwise():
    for s in shapes_up_to(10):
        for theta in (1, -1):
            p = PartialTranspose(s, theta)
            t = p.table()
            for i, j in itertools.product(range(s.M), repeat=2):
                k, l = p(i + 1, j + 1)
                assert t[i * s.M + j] == (k - 1) * s.M + (l - 1)


def test_b1_is_full_transpose():
    for d in range(1, 9):
        assert np.array_equal(G(1, 1, d).table(), FullTranspose(d).table())


def test_left_is_transpose_of_right():
    # the transpose of U^G is U^(G o T); for G = right partial transpose this is the left one
    for s in shapes_up_to(24):
        T = FullTranspose(s.M)
        right, left = PartialTranspose(s, 1), PartialTranspose(s, -1)
        assert np.array_equal(Compose((right, T)).table(), left.table())
        assert np.array_equal(Compose((T, right)).table(), left.table())
        # conjugating by the full transpose does not exchange the sides
        assert np.array_equal(Compose((T, right, T)).table(), right.table())


def test_compose_and_inverse():
    p, q = G(1, 2, 3), G(-1, 3, 2)
    c = Compose((p, q))
    for i, j in itertools.product(range(1, 7), repeat=2):
        assert c(i, j) == p(*q(i, j))
        assert Inverse(c)(*c(i, j)) == (i, j)
        assert c.inverse()(*c(i, j)) == (i, j)
    assert np.array_equal(Inverse(c).table()[c.table()], np.arange(36))
    assert np.array_equal(q.then(p).table(), c.table())
    with pytest.raises(ContractError):
        Compose((G(1, 2, 2), Identity(5)))


def test_tables_are_read_only():
    t = G(1, 2, 2).table()
    with pytest.raises(ValueError):
        t[0] = 3


def test_table_capacity_guard():
    with pytest.raises(CapacityError):
        Identity(2**14 + 1).table()


def test_fixed_point_examples():
    assert fixed_point_count(G(1, 2, 2), Identity(4)) == 8
    assert fixed_point_count(G(1, 1, 3), Identity(3)) == 3
    for s in shapes_up_to(12):
        p = PartialTranspose(s, 1)
        assert fixed_point_count(p, p) == s.M**2
        q = PartialTranspose(s, -1)
        assert fixed_point_count(p, q) == fixed_point_count(q, p)
    with pytest.raises(ContractError):
        fixed_point_count(Identity(3), Identity(4))
    with pytest.raises(ContractError):
        fixed_point_count(Identity(4), Identity(4), M=5)


def test_fixed_points_brute_force():
    p, q = G(1, 2, 2), G(-1, 2, 2)
    brute = sum(p(i, j) == q(i, j) for i in range(1, 5) for j in range(1, 5))
    assert fixed_point_count(p, q) == brute == 4


def _triples_brute(p, q, mode):
    M = p.M
    proj = {"full": lambda x: x, "coord_1": lambda x: x[0], "coord_2": lambda x: x[1]}[mode]
    return sum(
        proj(p(i1, j)) == proj(q(i2, j))
        for i1 in range(1, M + 1)
        for i2 in range(1, M + 1)
        for j in range(1, M + 1)
    )


def test_overlap_triple_examples():
    M = 5
    assert overlap_triple_count(Identity(M), Identity(M)) == M**2
    p, q = G(1, 2, 2), G(-1, 2, 2)
    assert overlap_triple_count(p, q) == _triples_brute(p, q, "full") == 4
    for mode in ("full", "coord_1", "coord_2"):
        for a, b in [(p, q), (G(1, 2, 3), G(1, 3, 2)), (G(-1, 2, 3), Identity(6))]:
            assert overlap_triple_count(a, b, mode=mode) == _triples_brute(a, b, mode)
    with pytest.raises(ContractError):
        overlap_triple_count(p, q, mode="bogus")


def test_full_triples_equal_fixed_points():
    for M in range(1, 25):
        family = [PartialTranspose(s, t) for s in shapes_up_to(M) if s.M == M for t in (1, -1)]
        for a, b in itertools.product(family, repeat=2):
            assert overlap_triple_count(a, b) == fixed_point_count(a, b)


def test_coordinate_reading_is_not_equinumerous():
    # projecting onto one output coordinate overcounts already for M = 4
    p = G(1, 2, 2)
    assert fixed_point_count(p, p) == 16
    assert overlap_triple_count(p, p, mode="coord_1") == 32
    assert overlap_triple_count(p, p, mode="coord_2") == 32


def test_string_forms():
    assert str(G(-1, 2, 4)) == "G(-1,2,4)"
    assert str(Identity(3)) == "I"
    assert str(FullTranspose(3)) == "T"
