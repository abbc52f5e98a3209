import math
from fractions import Fraction

import numpy as np
import pytest

from steinlab import config
from steinlab.alphabet import Alphabet, Distribution, JointDistribution
from steinlab.bounds import (definetti_constrained_check, definetti_type_bound,
                             filtered_superadditivity_check, is_symmetric, iid_type_mixture,
                             meta_lemma_phi, nasty_estimate_check, o_tilde, sanov_type_bound_check,
                             single_letterization_check, theta, transition_bound_check,
                             transition_probability, type_distance_test)
from steinlab.checks import random_symmetric
from steinlab.errors import DomainError
from steinlab.families import FamilySpec
from steinlab.typeclasses import Type

from oracles import kl_nats

A2 = Alphabet.of_size(2)
HALF = Distribution([0.5, 0.5])


def test_transition_equality_case():
    b = transition_bound_check("0", "1", 1 / 3, HALF, 0.5)
    assert transition_probability("0", "1", 1 / 3, HALF) == pytest.approx(1 / 6)
    assert b.margin == pytest.approx(0, abs=1e-12)


def test_transition_random(rng):
    R = Distribution([0.2, 0.5, 0.3])
    for _ in range(200):
        n = int(rng.integers(1, 7))
        x = "".join(rng.choice(list("012"), n))
        y = "".join(rng.choice(list("012"), n))
        c = float(rng.uniform(0.01, 0.2))
        delta = float(rng.uniform(0.01, 1 / (c + 1)))
        assert transition_bound_check(x, y, delta, R, c).holds(1e-12)
    with pytest.raises(DomainError):
        transition_bound_check("0", "1", 0.9, HALF, 0.5)


def test_transition_sums_to_one():
    R = Distribution([0.2, 0.5, 0.3])
    import itertools
    total = sum(transition_probability("012", "".join(y), 0.4, R) for y in itertools.product("012", repeat=3))
    assert total == pytest.approx(1.0)


def test_nasty_estimate(rng):
    P = Distribution([0.6, 0.3, 0.1])
    for _ in range(200):
        n = int(rng.integers(1, 9))
        x = "".join(rng.choice(list("012"), n))
        y = "".join(rng.choice(list("012"), n))
        assert nasty_estimate_check(P, x, y).holds(1e-12)


def test_sanov_example():
    spec = FamilySpec("composite_iid", base=[[0.5, 0.5]])
    b = sanov_type_bound_check(spec, 6, Type(A2, (2, 4)))
    assert Fraction(b.lhs).limit_denominator(1000) == Fraction(15, 64)
    expected = 2 ** (-6 * kl_nats([1 / 3, 2 / 3], [0.5, 0.5]) / math.log(2))
    assert b.rhs == pytest.approx(expected)
    assert b.holds()


def test_sanov_av_and_explicit():
    av = FamilySpec("arbitrarily_varying", base=[[0.9, 0.1], [0.6, 0.4]])
    for n in range(1, 6):
        for k in range(n + 1):
            assert sanov_type_bound_check(av, n, Type(A2, (k, n - k))).holds(1e-9)
    with pytest.raises(DomainError):
        sanov_type_bound_check(av, 3, Type(A2, (1, 1)))


def test_meta_lemma_rates():
    assert meta_lemma_phi(1e-6, 0.3, 2) < meta_lemma_phi(1e-3, 0.3, 2) < meta_lemma_phi(0.05, 0.3, 2)
    assert meta_lemma_phi(1e-20, 0.3, 2) < 1e-6
    assert o_tilde(10 ** 6, 0.5, 2) < o_tilde(100, 0.5, 2)
    assert o_tilde(10 ** 8, 0.5, 2) < 1e-5
    with pytest.raises(DomainError):
        theta(0.4, 10, 0.5, 2)


def test_theta_independent_formula():
    def h(x):
        return 0.0 if x in (0, 1) else -x * math.log(x) - (1 - x) * math.log(1 - x)

    for xi, n, eta, k in [(0.01, 10, 0.5, 2), (0.1, 100, 0.1, 3), (0.2, 7, 0.9, 4)]:
        inner = 4 * xi * math.log(k) + 6 * xi * math.log(k / xi) + 2 * h(3 * xi)
        ref = (math.sqrt(inner + 2 * k * math.log(n + 1) / n)
               + math.sqrt(2 * math.log(1 / eta) / n) + 2 * xi)
        assert theta(xi, n, eta, k) == pytest.approx(ref, rel=1e-12)
        with config.use_log_base("e"):
            assert theta(xi, n, eta, k) == pytest.approx(ref, rel=1e-12)


def test_o_tilde_units():
    bits = o_tilde(20, 0.3, 3)
    with config.use_log_base("e"):
        nats = o_tilde(20, 0.3, 3)
    assert bits == pytest.approx(nats / math.log(2))


def test_type_distance_test():
    import itertools
    null = FamilySpec("composite_iid", base=[[0.9, 0.1]])
    alt = FamilySpec("composite_iid", base=[[0.3, 0.7]])
    for n in (2, 4, 6):
        r = type_distance_test(null, alt, n, 0.15)
        acc = [i for i, x in enumerate(itertools.product(range(2), repeat=n))
               if abs(x.count(0) / n - 0.9) <= 0.15 + 1e-12]
        assert list(r.accept.indices) == acc
        alpha = 1 - sum(0.9 ** x.count(0) * 0.1 ** x.count(1)
                        for x in itertools.product(range(2), repeat=n)
                        if abs(x.count(0) / n - 0.9) <= 0.15 + 1e-12)
        assert r.alpha == pytest.approx(alpha)
    assert type_distance_test(null, alt, 8, 0.15).exponent > 0.5
    # delta = 1 accepts everything
    r = type_distance_test(null, alt, 3, 1.0)
    assert r.alpha == pytest.approx(0) and r.beta == pytest.approx(1)


def test_iid_type_mixture_brute():
    import itertools
    n = 3
    mix = iid_type_mixture(A2, n)
    for i, x in enumerate(itertools.product(range(2), repeat=n)):
        total = 0.0
        for k in range(n + 1):
            f = [k / n, 1 - k / n]
            total += math.prod(f[s] for s in x)
        assert mix[i] == pytest.approx(total)


def test_definetti_exact(rng):
    for n in range(1, 6):
        Q = random_symmetric(Alphabet.of_size(3) if n < 5 else A2, n, rng)
        assert is_symmetric(Q)
        r = definetti_type_bound(Q)
        assert r.violations == 0 and r.margin > 0
    with pytest.raises(DomainError):
        definetti_type_bound(JointDistribution([0.5, 0.5, 0, 0], A2, 2))


def test_definetti_constrained_seeded():
    spec = FamilySpec("composite_iid", base=[[0.8, 0.2], [0.6, 0.4]])
    Q = JointDistribution(np.array([0.64, 0.16, 0.16, 0.04]), A2, 2)
    r = definetti_constrained_check(spec, Q, 5.0, 20000, np.random.default_rng(3))
    assert r.coverage == 1.0
    r2 = definetti_constrained_check(spec, Q, 5.0, 20000, np.random.default_rng(3))
    np.testing.assert_array_equal(r.estimate, r2.estimate)


def test_filtered_superadditivity(rng):
    specs = [FamilySpec("composite_iid", base=[[0.8, 0.2], [0.5, 0.5]]),
             FamilySpec("arbitrarily_varying", base=[[0.8, 0.2], [0.5, 0.5]])]
    for spec in specs:
        for _ in range(10):
            laws = [Distribution(rng.dirichlet([1, 1])) for _ in range(2)]
            assert filtered_superadditivity_check(laws, spec).holds(1e-6)
    with pytest.raises(DomainError):
        filtered_superadditivity_check([HALF], specs[0])


def av_segment_grid(P, base, steps=20001):
    a, b = np.array(base[0]), np.array(base[1])
    best = math.inf
    for t in np.linspace(0, 1, steps):
        best = min(best, kl_nats(P, t * a + (1 - t) * b))
    return best


def test_single_letterization():
    P = Distribution([0.3, 0.7])
    iid = FamilySpec("composite_iid", base=[[0.8, 0.2], [0.6, 0.4]])
    for n in (1, 2, 3, 4):
        r = single_letterization_check(P, iid, n)
        assert r.upper_margin >= -1e-7 and r.lower_margin >= -1e-7
    with config.use_log_base("e"):
        av = FamilySpec("arbitrarily_varying", base=[[0.8, 0.2], [0.6, 0.4]])
        ref = av_segment_grid(P.weights, av.base)
        for n in (1, 2, 3):
            r = single_letterization_check(P, av, n)
            assert r.value == pytest.approx(r.target, abs=1e-6)
            assert r.target == pytest.approx(ref, abs=1e-6)
