import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog as scipy_linprog

from steinlab import config
from steinlab.alphabet import Distribution, StochasticChannel, tensor_power
from steinlab.divergences import (CAPPED_INFINITE, Polytope, binary_entropy, binary_rel_ent,
                                  d_hyp, d_hyp_neyman_pearson, d_max, d_max_smooth,
                                  duality_sandwich_check, entropy_continuity_check, f_aux,
                                  f_aux_pair_margin, f_aux_variational_check, filtered_kl, g_func,
                                  kl, min_kl_between_polytopes, min_kl_to_polytope,
                                  relent_continuity_bound_check, renyi_half)
from steinlab.errors import DomainError
from steinlab.werner import werner_channel

from oracles import dhyp_threshold_grid, f_aux_inf_grid, f_aux_sup_grid, kl_nats, min_kl_grid

LOG2 = math.log(2)


def law(k):
    return st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k).map(
        lambda v: Distribution(v, normalize=True))


def rand_law(rng, k, sparse=False):
    w = rng.dirichlet(np.ones(k))
    if sparse and rng.random() < 0.3:
        w[rng.integers(k)] = 0
    return Distribution(w, normalize=True)


def test_kl_examples():
    P = Distribution([0.2, 0.8])
    assert kl(P, P) == 0
    assert kl(Distribution([1, 0, 0, 0]), Distribution([0.25] * 4)) == pytest.approx(2)
    assert kl(Distribution([0.5, 0.5]), Distribution([1, 0])) == math.inf
    with config.use_log_base("e"):
        assert kl(Distribution([1, 0]), Distribution([0.5, 0.5])) == pytest.approx(LOG2)


def test_d_max_examples(rng):
    P = Distribution([0.3, 0.7])
    assert d_max(P, P) == 0
    assert d_max(Distribution([1, 0]), Distribution([0.5, 0.5])) == pytest.approx(1)
    assert d_max(Distribution([0.5, 0.5]), Distribution([1, 0])) == math.inf
    for _ in range(1000):
        k = int(rng.integers(2, 5))
        P, Q = rand_law(rng, k, True), rand_law(rng, k)
        assert d_max(P, Q) >= kl(P, Q) - 1e-12


def test_d_max_smooth_examples():
    P, Q = Distribution([1, 0]), Distribution([0.5, 0.5])
    assert d_max_smooth(P, Q, 0.25).value == pytest.approx(math.log2(1.5), abs=1e-9)
    assert d_max_smooth(P, Q, 0).value == pytest.approx(d_max(P, Q), abs=1e-9)
    r = d_max_smooth(P, Q, 0.25)
    assert 0.5 * np.abs(r.optimizer - P.weights).sum() <= 0.25 + 1e-9
    assert math.log2(np.max(r.optimizer / Q.weights)) == pytest.approx(r.value, abs=1e-7)
    with pytest.raises(DomainError):
        d_max_smooth(P, Q, -0.1)


def test_d_max_smooth_against_highs(rng):
    for _ in range(100):
        k = int(rng.integers(2, 5))
        p, q = rand_law(rng, k).weights, rand_law(rng, k).weights
        eps = float(rng.uniform(0, 0.9))
        # variables P', t, u
        N = k
        c = np.r_[np.zeros(N), 1, np.zeros(N)]
        A = np.vstack([np.hstack([np.eye(N), -q[:, None], np.zeros((N, N))]),
                       np.hstack([-np.eye(N), np.zeros((N, 1)), -np.eye(N)]),
                       np.r_[np.zeros(N + 1), np.ones(N)][None]])
        b = np.r_[np.zeros(N), -p, eps]
        eq = np.r_[np.ones(N), 0, np.zeros(N)][None]
        ref = scipy_linprog(c, A, b, eq, [1], bounds=[(0, None)] * (2 * N + 1), method="highs")
        assert d_max_smooth(Distribution(p), Distribution(q), eps).value == pytest.approx(
            max(math.log2(ref.fun), 0.0), abs=1e-7)


def test_d_hyp_examples(rng):
    for _ in range(50):
        P = rand_law(rng, 3)
        eps = float(rng.uniform(0.01, 0.99))
        assert d_hyp(P, P, eps).value == pytest.approx(-math.log2(1 - eps), abs=1e-9)
    P, Q = Distribution([0.6, 0.4]), Distribution([0.1, 0.9])
    prev = -math.inf
    for eps in np.linspace(0.01, 0.95, 20):
        v = d_hyp(P, Q, eps).value
        assert v >= prev - 1e-12
        prev = v


def test_d_hyp_certificate(rng):
    for _ in range(100):
        k = int(rng.integers(2, 5))
        P, Q = rand_law(rng, k, True), rand_law(rng, k, True)
        eps = float(rng.uniform(0.01, 0.9))
        r = d_hyp(P, Q, eps)
        A = r.optimizer
        assert np.all(A >= -1e-12) and np.all(A <= 1 + 1e-12)
        assert float((1 - A) @ P.weights) <= eps + 1e-9
        if r.finite:
            assert -math.log2(float(A @ Q.weights)) == pytest.approx(r.value, abs=1e-7)


def test_d_hyp_against_threshold_grid(rng):
    for _ in range(300):
        k = int(rng.integers(2, 4))
        P, Q = rand_law(rng, k, True), rand_law(rng, k, True)
        eps = float(rng.uniform(0.01, 0.95))
        ref = dhyp_threshold_grid(P.weights, Q.weights, eps) / LOG2
        got = d_hyp(P, Q, eps).value
        if math.isinf(ref):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(ref, abs=1e-7)
            assert d_hyp_neyman_pearson(P, Q, eps) == pytest.approx(ref, abs=1e-7)


def test_d_hyp_infinite_status():
    r = d_hyp(Distribution([1, 0]), Distribution([0, 1]), 0.1)
    assert r.solver_status == CAPPED_INFINITE and r.value == math.inf and not r.finite


def test_handy_inequality(rng):
    for _ in range(200):
        k = int(rng.integers(2, 5))
        P, Q = rand_law(rng, k), rand_law(rng, k)
        eps = float(rng.uniform(0.01, 0.9))
        assert kl(P, Q) >= -1 + (1 - eps) * d_hyp(P, Q, eps).value - 1e-9


def test_d_max_smooth_monotone():
    P, Q = Distribution([0.7, 0.2, 0.1]), Distribution([0.1, 0.3, 0.6])
    vals = [d_max_smooth(P, Q, e).value for e in np.linspace(0, 0.95, 20)]
    assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


def test_sandwich_corrected_form_holds(rng):
    for _ in range(100):
        k = int(rng.integers(2, 4))
        s = duality_sandwich_check(rand_law(rng, k), rand_law(rng, k), 0.3, 0.2)
        assert s.lower_normalized_margin >= -1e-6
        assert s.upper_margin >= -1e-6


def test_sandwich_literal_lower_fails_at_equal_laws():
    # with normalised smoothing, P = Q makes the log(1/eps) lower end too large
    P = Distribution([0.5, 0.5])
    s = duality_sandwich_check(P, P, 0.3, 0.2)
    assert s.d_hyp == pytest.approx(-math.log2(0.7), abs=1e-9)
    assert s.lower == pytest.approx(math.log2(1 / 0.3), abs=1e-9)
    assert s.lower_margin < 0
    assert s.lower_normalized_margin == pytest.approx(0, abs=1e-9)


def test_sandwich_domain():
    P = Distribution([0.5, 0.5])
    with pytest.raises(DomainError):
        duality_sandwich_check(P, P, 0.5, 0.6)


def test_binary_functions():
    assert binary_rel_ent(0.3, 0.3) == 0
    assert binary_entropy(0.5) == pytest.approx(1)
    assert g_func(1) == pytest.approx(2)
    assert binary_rel_ent(0.5, 0) == math.inf
    with config.use_log_base("e"):
        assert g_func(1) == pytest.approx(2 * LOG2)


def test_renyi_half():
    P = Distribution([0.4, 0.6])
    assert renyi_half(P, P) == pytest.approx(0, abs=1e-15)
    assert renyi_half(Distribution([1, 0]), Distribution([0, 1])) == math.inf
    assert renyi_half(Distribution([1, 0]), Distribution([0.5, 0.5])) == pytest.approx(1)


def test_f_aux_branches():
    for c in (0.1, 0.5, 1.0):
        assert f_aux(c, 0) == 0
        knee = 1 / (c + 1)
        assert f_aux(c, knee + 0.1) == pytest.approx(math.log2(1 + 1 / c))
        assert f_aux(c, knee) == pytest.approx(math.log2(1 + 1 / c), abs=1e-12)
        assert f_aux(c, 5.0) == pytest.approx(math.log2(1 + 1 / c))


def test_f_aux_grid_oracles():
    for c in np.linspace(0.05, 1, 12):
        for x in np.linspace(0, 2, 12):
            v = f_aux(float(c), float(x)) * LOG2
            assert v == pytest.approx(f_aux_sup_grid(c, x), abs=1e-9)
            assert v == pytest.approx(f_aux_inf_grid(c, x), abs=1e-7)
            r = f_aux_variational_check(float(c), float(x))
            assert r.sup_error <= 1e-9 and r.inf_error <= 1e-7


def test_f_aux_pair_inequality():
    for c1 in np.linspace(0.05, 1, 15):
        for c2 in np.linspace(0.05, 1, 15):
            for x in np.linspace(0, 1.5, 15):
                assert f_aux_pair_margin(c1, c2, x) >= -1e-12
    assert f_aux_pair_margin(0.3, 0.3, 0.2) == 0


def test_filtered_kl_examples(rng):
    P, Q = rand_law(rng, 2), rand_law(rng, 2)
    F = Polytope.from_laws([Q])
    assert filtered_kl(P, F, StochasticChannel(np.eye(2))).value == pytest.approx(kl(P, Q), abs=1e-9)
    const = StochasticChannel([[0.3, 0.3], [0.7, 0.7]])
    assert filtered_kl(P, F, const).value == pytest.approx(0, abs=1e-12)
    W = werner_channel(2.0)
    for _ in range(50):
        P, Q = rand_law(rng, 2), rand_law(rng, 2)
        assert filtered_kl(P, Polytope.from_laws([Q]), W).value <= kl(P, Q) + 1e-9


@settings(max_examples=80, deadline=None)
@given(law(3), law(3), st.integers(0, 2 ** 31))
def test_data_processing(P, Q, seed):
    W = StochasticChannel(np.random.default_rng(seed).dirichlet(np.ones(4), size=3).T)
    assert kl(W(P), W(Q)) <= kl(P, Q) + 1e-9


def test_min_kl_examples():
    F = Polytope.from_laws([Distribution([0.5, 0.5]), Distribution([0.25, 0.75])])
    assert min_kl_to_polytope(Distribution([1, 0]), F).value == pytest.approx(1, abs=1e-7)
    assert min_kl_to_polytope(Distribution([0.4, 0.6]), F).value == pytest.approx(0, abs=1e-7)
    G = Polytope.from_laws([Distribution([0, 1])])
    r = min_kl_to_polytope(Distribution([0.5, 0.5]), G)
    assert r.value == math.inf and r.solver_status == CAPPED_INFINITE


def test_min_kl_against_grid(rng):
    for _ in range(25):
        k = int(rng.integers(2, 4))
        m = int(rng.integers(2, 4))
        G = rng.dirichlet(np.ones(k), size=m)
        P = rng.dirichlet(np.ones(k))
        got = min_kl_to_polytope(Distribution(P), Polytope(Distribution(P).alphabet, 1, G))
        ref = min_kl_grid(P, G) / LOG2
        assert got.value <= ref + 1e-9
        assert got.value == pytest.approx(ref, abs=2e-3)
        assert got.residual <= 1e-7


def test_min_kl_between_polytopes_matches_outer_grid(rng):
    R = rng.dirichlet(np.ones(2), size=2)
    S = rng.dirichlet(np.ones(2), size=2)
    got = min_kl_between_polytopes(Polytope(Distribution(R[0]).alphabet, 1, R),
                                   Polytope(Distribution(R[0]).alphabet, 1, S))
    ref = min(min_kl_grid(a * R[0] + (1 - a) * R[1], S) for a in np.linspace(0, 1, 1001)) / LOG2
    assert got.value == pytest.approx(ref, abs=2e-3)
    assert got.lower <= got.value


def test_entropy_continuity(rng):
    for _ in range(1000):
        k = int(rng.integers(2, 6))
        b = entropy_continuity_check(rand_law(rng, k, True), rand_law(rng, k, True))
        assert b.holds(1e-12)


def test_relent_continuity(rng):
    base = [Distribution([0.5, 0.5]), Distribution([0.3, 0.7])]
    gens = np.array([np.multiply.outer(a.weights, b.weights).ravel() for a in base for b in base])
    F = Polytope(base[0].alphabet, 2, gens)
    c = 0.4
    P = tensor_power(Distribution([0.9, 0.1]), 2)
    assert relent_continuity_bound_check(P, P, F, c).margin >= -1e-7
    for _ in range(50):
        Pp = (1 - 0.3) * P.weights + 0.3 * rng.dirichlet(np.ones(4))
        assert relent_continuity_bound_check(P, type(P)(Pp, P.alphabet, 2, normalize=True), F, c).holds(1e-6)
    far = type(P)([0, 0, 0, 1], P.alphabet, 2)
    b = relent_continuity_bound_check(P, far, F, c, eps=1.0)
    assert b.holds(1e-6)
    with pytest.raises(DomainError):
        relent_continuity_bound_check(P, far, F, c, eps=0.5)


def test_kl_matches_plain_formula(rng):
    for _ in range(100):
        P, Q = rand_law(rng, 4, True), rand_law(rng, 4, True)
        ref = kl_nats(P.weights, Q.weights)
        got = kl(P, Q)
        assert (math.isinf(ref) and math.isinf(got)) or got == pytest.approx(ref / LOG2, abs=1e-12)
