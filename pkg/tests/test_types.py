import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steinlab.alphabet import Alphabet, Distribution, all_strings, tensor_power
from steinlab.errors import CapacityError, DomainError
from steinlab.typeclasses import (StringSet, Type, concentration_radius, enumerate_type_class,
                                  enumerate_types, hamming_ball, hamming_ball_weight,
                                  hamming_concentration_check, hamming_distance,
                                  iid_weight_of_type_class, number_of_types, type_class_indices,
                                  type_class_sandwich, type_class_size, type_of_string,
                                  type_tv_distance)

AB = Alphabet(("a", "b"))


def brute_types(k, n):
    return sorted({tuple(Counter(s).get(i, 0) for i in range(k))
                   for s in itertools.product(range(k), repeat=n)})


def test_enumerate_types_examples():
    a = Alphabet.of_size(2)
    assert [V.counts for V in enumerate_types(a, 2)] == [(0, 2), (1, 1), (2, 0)]
    assert [V.counts for V in enumerate_types(Alphabet.of_size(3), 1)] == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


@pytest.mark.parametrize("k,n", [(2, 5), (3, 4), (4, 3)])
def test_enumerate_types_against_itertools(k, n):
    got = [V.counts for V in enumerate_types(Alphabet.of_size(k), n)]
    assert len(got) == len(set(got)) == math.comb(n + k - 1, k - 1) == number_of_types(k, n)
    assert got == brute_types(k, n)


def test_type_of_string():
    assert type_of_string("aab", AB).counts == (2, 1)
    assert type_of_string("bbbb", AB).counts == (0, 4)
    with pytest.raises(DomainError):
        type_of_string("abz", AB)


def test_type_class_size_examples():
    a = Alphabet.of_size(2)
    assert type_class_size(Type(a, (3, 0))) == 1
    assert type_class_size(Type(a, (2, 2))) == 6
    assert type_class_size(Type(Alphabet.of_size(3), (40, 30, 30))) == math.factorial(100) // (
        math.factorial(40) * math.factorial(30) ** 2)


def test_sizes_partition_strings():
    for k in (2, 3):
        a = Alphabet.of_size(k)
        for n in range(1, 13):
            assert sum(type_class_size(V) for V in enumerate_types(a, n)) == k ** n


def test_sandwich_everywhere():
    for k in (2, 3):
        for n in range(1, 11):
            for V in enumerate_types(Alphabet.of_size(k), n):
                r = type_class_sandwich(V)
                assert r.holds, (V, r)


def test_enumerate_type_class():
    a = Alphabet.of_size(2)
    assert enumerate_type_class(Type(a, (0, 3))).tolist() == [[1, 1, 1]]
    assert enumerate_type_class(Type(a, (1, 1))).tolist() == [[0, 1], [1, 0]]
    V = Type(Alphabet.of_size(3), (2, 1, 2))
    rows = enumerate_type_class(V)
    assert len(rows) == type_class_size(V) == len({tuple(r) for r in rows})
    assert all(tuple(np.bincount(r, minlength=3)) == V.counts for r in rows)
    with pytest.raises(CapacityError):
        enumerate_type_class(V, cap=10)


def test_type_class_indices_match_enumeration():
    V = Type(Alphabet.of_size(3), (1, 2, 1))
    place = 3 ** np.arange(3, -1, -1)
    assert sorted(enumerate_type_class(V) @ place) == type_class_indices(V).tolist()


def test_iid_weight_examples(rng):
    a = Alphabet.of_size(2)
    u = Distribution([0.5, 0.5])
    assert iid_weight_of_type_class(u, Type(a, (2, 2))) == pytest.approx(6 / 16)
    P = Distribution([0.3, 0.7])
    assert iid_weight_of_type_class(P, Type(a, (5, 0))) == pytest.approx(0.3 ** 5)
    assert iid_weight_of_type_class(Distribution([0, 1]), Type(a, (1, 3))) == 0
    Q = Distribution(rng.dirichlet(np.ones(3)))
    types = enumerate_types(Q.alphabet, 5)
    assert sum(iid_weight_of_type_class(Q, V) for V in types) == pytest.approx(1, abs=1e-12)
    Q5 = tensor_power(Q, 5).weights
    for V in types:
        assert iid_weight_of_type_class(Q, V) == pytest.approx(Q5[type_class_indices(V)].sum(), rel=1e-10)


def test_hamming_distance():
    assert hamming_distance("abba", "abba") == 0
    assert hamming_distance("00", "11") == 2
    assert hamming_distance("aab", "abb") == 1
    with pytest.raises(DomainError):
        hamming_distance("a", "ab")


def test_hamming_ball_examples():
    a = Alphabet.of_size(2)
    Y = StringSet.from_strings(a, ["000"])
    u = Distribution([0.5, 0.5])
    assert hamming_ball_weight(Y, 1, u) == pytest.approx(4 / 8)
    assert hamming_ball_weight(Y, 3, u) == pytest.approx(1)
    P = Distribution([0.2, 0.8])
    assert hamming_ball_weight(Y, 0, P) == pytest.approx(0.2 ** 3)
    with pytest.raises(DomainError):
        hamming_ball_weight(StringSet(a, 3, []), 1, u)


@pytest.mark.parametrize("k,n", [(2, 6), (3, 4)])
def test_hamming_ball_brute_force(k, n, rng):
    strings = all_strings(k, n)
    dist = (strings[:, None, :] != strings[None, :, :]).sum(axis=2)
    for _ in range(10):
        Y = rng.choice(k ** n, size=int(rng.integers(1, 5)), replace=False)
        for K in range(n + 1):
            expect = np.flatnonzero(dist[Y].min(axis=0) <= K)
            assert hamming_ball(StringSet(Alphabet.of_size(k), n, Y), K).indices.tolist() == expect.tolist()


def test_type_tv_examples():
    a = Alphabet.of_size(2)
    assert type_tv_distance(Type(a, (3, 1)), Distribution([0.5, 0.5])) == pytest.approx(0.25)
    assert type_tv_distance(Type(a, (1, 1)), Distribution([0.5, 0.5])) == 0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=10), st.data())
def test_type_tv_bounded_by_hamming(x, data):
    y = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
    a = Alphabet.of_size(2)
    sx, sy = a.decode(x), a.decode(y)
    assert type_tv_distance(type_of_string(sx, a), type_of_string(sy, a)) <= hamming_distance(x, y) / len(x) + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=8), st.randoms())
def test_type_permutation_invariant(x, rnd):
    a = Alphabet.of_size(3)
    y = list(x)
    rnd.shuffle(y)
    assert type_of_string(a.decode(x), a) == type_of_string(a.decode(y), a)


def test_concentration_radius():
    assert concentration_radius(10, 0.1, 0.5) == math.ceil(math.sqrt(20 * math.log(10)) + math.sqrt(20 * math.log(2)))


def test_hamming_concentration_randomized(rng):
    a = Alphabet.of_size(2)
    n = 14
    for _ in range(20):
        P = Distribution(rng.dirichlet([1, 1]))
        Pn = tensor_power(P, n).weights
        order = rng.permutation(2 ** n)
        stop = int(np.searchsorted(np.cumsum(Pn[order]), 0.2)) + 1
        r = hamming_concentration_check(P, StringSet(a, n, order[:stop]), 0.2, 0.3)
        assert r.holds


def test_sandwich_exact_with_fractions():
    # independent check of the upper half with exact rationals: |T_V| prod V(x)^{k(x)} <= 1
    for V in enumerate_types(Alphabet.of_size(3), 7):
        term = Fraction(type_class_size(V))
        for c in V.counts:
            term *= Fraction(c, V.n) ** c
        assert term <= 1
