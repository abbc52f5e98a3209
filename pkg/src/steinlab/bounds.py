"""Numerical checks of the inequalities used in proofs about Stein exponents.

Every check returns a :class:`~steinlab.divergences.BoundCheck` (or a small
report) whose margin is nonnegative when the inequality holds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .alphabet import (Alphabet, Distribution, JointDistribution, all_strings,
                       tensor_power, tensor_product)
from .divergences import (BoundCheck, Polytope, f_aux, tv_to_hull, filtered_kl, kl,
                          min_kl_batch, min_kl_to_polytope)
from .errors import DomainError
from .families import FamilySpec, realize
from .kernel import binary_entropy_nats
from .projection import kl_from_tv_ball
from .typeclasses import (StringSet, Type, enumerate_types, hamming_distance,
                          iid_weight_of_type_class, string_counts, type_class_indices,
                          type_class_size, type_of_string)


# Rates in the blurring and meta lemmas -------------------------------------------------

def _inner_root(xi: float, k: int) -> float:
    """``4 xi ln k + 2 (3 xi ln(k / xi) + h2(3 xi))`` with every logarithm natural."""
    if not 0 < xi < 1 / 3:
        raise DomainError("xi must lie in (0, 1/3)")
    return 4 * xi * math.log(k) + 2 * (3 * xi * math.log(k / xi) + binary_entropy_nats(3 * xi))


def theta(xi: float, n: int, eta: float, k: int) -> float:
    if not 0 < eta < 1:
        raise DomainError("eta must lie in (0, 1)")
    return (math.sqrt(_inner_root(xi, k) + 2 * k * math.log(n + 1) / n)
            + math.sqrt(2 / n * math.log(1 / eta)) + 2 * xi)


def o_tilde(n: int, eta: float, k: int) -> float:
    return config.from_nats((k * math.log(n + 1) + math.log(1 / (1 - eta))) / n)


def meta_lemma_phi(xi: float, c: float, k: int) -> float:
    return 2 * f_aux(min(c, 1 / k), math.sqrt(_inner_root(xi, k)) + 2 * xi)


def meta_lemma_rhs(lam: float, xi: float, c: float, k: int, delta: float) -> float:
    """``lambda + phi(xi) + Delta``."""
    return lam + meta_lemma_phi(xi, c, k) + delta


def blurring_rhs(lam: float, mu: float, xi: float, n: int, c: float, k: int,
                 eta: float = 0.5) -> float:
    """``lambda + 2 F(sqrt(2 mu / log e) + theta) + o~(1/n)``."""
    arg = math.sqrt(2 * config.to_nats(mu)) + theta(xi, n, eta, k)
    return lam + 2 * f_aux(min(c, 1 / k), arg) + o_tilde(n, eta, k)


# Symbol-level estimates ----------------------------------------------------------------

def transition_probability(x, y, delta: float, R: Distribution) -> float:
    """Exact probability that per-symbol depolarisation maps string ``x`` to ``y``."""
    xi, yi = R.alphabet.encode(x), R.alphabet.encode(y)
    if xi.size != yi.size:
        raise DomainError("strings must have equal length")
    r = R.weights[yi]
    per = np.where(xi == yi, (1 - delta) + delta * r, delta * r)
    return float(np.prod(per))


def transition_bound_check(x, y, delta: float, R: Distribution, c: float) -> BoundCheck:
    """``log`` of the lower bound versus ``log`` of the exact transition probability."""
    yi = R.alphabet.encode(y)
    if not 0 < c <= float(R.weights[yi].min()):
        raise DomainError("c must be positive and at most R(y) on the symbols of y")
    if not 0 < delta <= 1 / (c + 1):
        raise DomainError("delta must lie in (0, 1/(c+1)]")
    n = yi.size
    d = hamming_distance(R.alphabet.encode(x), yi)
    log_bound = n * math.log(1 - delta) + d * math.log(c * delta / (1 - delta))
    exact = transition_probability(x, y, delta, R)
    return BoundCheck(config.from_nats(log_bound), config.from_nats(math.log(exact)))


def nasty_estimate_check(P: Distribution, x, y) -> BoundCheck:
    """``log P^n(x)`` against ``|X| log(n+1) + n F_{1/|X|}(s) - log |T_{V_y}|`` with ``s = d(x,y)/n``."""
    a = P.alphabet
    xi, yi = a.encode(x), a.encode(y)
    n = xi.size
    s = hamming_distance(xi, yi) / n
    k = a.size
    p = P.weights[xi]
    lhs = -math.inf if np.any(p <= 0) else config.from_nats(float(np.log(p).sum()))
    rhs = (config.from_nats(k * math.log(n + 1)) + n * f_aux(1 / k, s)
           - config.from_nats(math.log(type_class_size(type_of_string(y, a)))))
    return BoundCheck(lhs, rhs)


# Sanov-type decay ---------------------------------------------------------------------

def _product_type_mass(factors: np.ndarray, counts: tuple) -> float:
    """Probability that independent draws from the rows of ``factors`` have ``counts``."""
    k = len(counts)
    table = np.zeros(tuple(c + 1 for c in counts))
    table[(0,) * k] = 1.0
    for f in factors:
        new = np.zeros_like(table)
        for s in range(k):
            if counts[s] == 0 or f[s] == 0:
                continue
            src = [slice(None)] * k
            dst = [slice(None)] * k
            src[s] = slice(0, counts[s])
            dst[s] = slice(1, counts[s] + 1)
            new[tuple(dst)] += f[s] * table[tuple(src)]
        table = new
    return float(table[tuple(counts)])


def sanov_type_bound_check(spec: FamilySpec, n: int, V: Type) -> BoundCheck:
    """``sup_Q Q_n(T_V)`` against ``exp(-n min_B D(V || B))``.

    For composite and simple iid families the minimum runs over the base
    laws. For arbitrarily varying families the supremum is computed exactly
    over all products and the exponent uses the hull of the base. Other
    families use their generators and the hull of the level-one set.
    """
    if V.n != n:
        raise DomainError("type and block length disagree")
    Vd = V.as_distribution()
    if spec.kind in ("simple_iid", "composite_iid"):
        laws = [Distribution(b) for b in spec.base]
        lhs = max(iid_weight_of_type_class(B, V) for B in laws)
        expo = min(kl(Vd, B) for B in laws)
    elif spec.kind == "arbitrarily_varying":
        base = np.array(spec.base)
        lhs = 0.0
        for combo in itertools.combinations_with_replacement(range(len(base)), n):
            lhs = max(lhs, _product_type_mass(base[list(combo)], V.counts))
        expo = min_kl_to_polytope(Vd, Polytope(V.alphabet, 1, base)).lower
    else:
        F = realize(spec, n)
        lhs = float(F.generators[:, type_class_indices(V)].sum(axis=1).max())
        expo = min_kl_to_polytope(Vd, realize(spec, 1).polytope).lower
    rhs = 0.0 if math.isinf(expo) else float(config.exp(-n * expo))
    return BoundCheck(lhs, rhs)


# Tests built from types ---------------------------------------------------------------

@dataclass
class TypeTestReport:
    n: int
    delta: float
    accept: StringSet
    alpha: float
    beta: float

    @property
    def exponent(self) -> float:
        return math.inf if self.beta <= 0 else config.from_nats(-math.log(self.beta)) / self.n


def type_distance_test(null: FamilySpec, alt: FamilySpec, n: int, delta: float,
                       hull: bool = True) -> TypeTestReport:
    """Accept the null iff the empirical type is within ``delta`` of ``R_1``."""
    R1 = realize(null, 1).generators
    a = realize(null, 1).alphabet
    keep = []
    counts = string_counts(a.size, n)
    for V in enumerate_types(a, n):
        f = V.freqs
        d = tv_to_hull(f, R1) if hull else min(0.5 * float(np.abs(f - g).sum()) for g in R1)
        if d <= delta + 1e-12:
            keep.append(np.flatnonzero(np.all(counts == np.array(V.counts), axis=1)))
    idx = np.concatenate(keep) if keep else np.zeros(0, dtype=np.int64)
    acc = np.zeros(a.size ** n, dtype=bool)
    acc[idx] = True
    Rn, Sn = realize(null, n).generators, realize(alt, n).generators
    alpha = float((Rn[:, ~acc].sum(axis=1)).max())
    beta = float((Sn[:, acc].sum(axis=1)).max())
    return TypeTestReport(n, delta, StringSet(a, n, idx), alpha, beta)


# De Finetti reductions ----------------------------------------------------------------

def is_symmetric(Q: JointDistribution, tol: float = 1e-12) -> bool:
    t = Q.tensor
    for pi in itertools.permutations(range(Q.n)):
        if np.abs(np.transpose(t, pi) - t).max() > tol:
            return False
    return True


def iid_type_mixture(a: Alphabet, n: int) -> np.ndarray:
    """``sum_V V^{(x)n}`` over all types at length ``n``."""
    strings_counts = string_counts(a.size, n)
    total = np.zeros(a.size ** n)
    for V in enumerate_types(a, n):
        f = V.freqs
        with np.errstate(divide="ignore"):
            logs = np.where(strings_counts > 0, strings_counts * np.log(np.where(f > 0, f, 1.0)), 0.0)
        impossible = np.any((strings_counts > 0) & (f == 0)[None, :], axis=1)
        total += np.where(impossible, 0.0, np.exp(logs.sum(axis=1)))
    return total


@dataclass
class DeFinettiReport:
    ratio: float         # max_x Q(x) / sum_V V^n(x)
    bound: float         # (n + 1)^|X|
    violations: int

    @property
    def margin(self) -> float:
        return self.bound - self.ratio


def definetti_type_bound(Q: JointDistribution) -> DeFinettiReport:
    """Entry-wise ``Q <= (n+1)^|X| sum_V V^{(x)n}`` for permutation-symmetric ``Q``."""
    if not is_symmetric(Q, 1e-10):
        raise DomainError("Q must be invariant under permutations of positions")
    mix = iid_type_mixture(Q.alphabet, Q.n)
    bound = float((Q.n + 1) ** Q.alphabet.size)
    ratio = float(np.max(Q.weights / mix))
    return DeFinettiReport(ratio, bound, int(np.sum(Q.weights > bound * mix * (1 + 1e-12))))


def sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass
class ConstrainedDeFinettiReport:
    coverage: float
    estimate: np.ndarray
    target: np.ndarray
    samples: int


def definetti_constrained_check(spec: FamilySpec, Q: JointDistribution, delta: float,
                                samples: int, rng: np.random.Generator) -> ConstrainedDeFinettiReport:
    """Monte Carlo estimate of ``int dP exp(-D(P^n || F_n) + n Delta) P^n`` against ``Q``.

    ``dP`` is the push-forward of the surface measure on the unit sphere of
    ``R^d`` (``d = |supp R|``) under squaring of coordinates. Reports the
    fraction of strings ``x`` where the estimate is at least ``Q(x)``.
    """
    n = Q.n
    F = realize(spec, n)
    a = F.alphabet
    supp = np.flatnonzero(spec.reference_law().weights > 0)
    d = supp.size
    psi = rng.standard_normal((samples, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    P1 = np.zeros((samples, a.size))
    P1[:, supp] = psi ** 2
    strings = all_strings(a.size, n)
    Pn = np.prod(P1[:, strings], axis=2)
    dist, gap = min_kl_batch(Pn, F.polytope, tol=1e-9, max_iter=2000)
    weight = config.exp(-dist + n * delta)
    est = sphere_area(d) * (weight[:, None] * Pn).mean(axis=0)
    cover = float(np.mean(est >= Q.weights))
    return ConstrainedDeFinettiReport(cover, est, Q.weights.copy(), samples)


# Superadditivity and single-letter limits --------------------------------------------

def filtered_superadditivity_check(laws, spec: FamilySpec) -> BoundCheck:
    """``D(P_1..P_n || F_n) >= D(P_1..P_{n-1} || F_{n-1}) + D^W(P_n || F_1)``.

    The filter ``W`` is the family's own (identity except for Werner-type
    families). The left side uses its certified lower bound, the right side
    Frank-Wolfe values, which over-estimate the minima.
    """
    laws = list(laws)
    n = len(laws)
    if n < 2:
        raise DomainError("need at least two factors")
    full = min_kl_to_polytope(tensor_product(*laws), realize(spec, n).polytope)
    head = min_kl_to_polytope(tensor_product(*laws[:-1]), realize(spec, n - 1).polytope)
    last = filtered_kl(laws[-1], realize(spec, 1).polytope, spec.filter_channel())
    return BoundCheck(head.value + last.value, full.lower)


@dataclass
class SingleLetterReport:
    n: int
    value: float        # (1/n) D(P^n || co F_n)
    target: float
    lower: float        # proven lower bound on value (or -inf if none applies)

    @property
    def upper_margin(self) -> float:
        return self.target - self.value

    @property
    def lower_margin(self) -> float:
        return self.value - self.lower


def _ball_lower_bound(P: Distribution, spec: FamilySpec, n: int) -> float:
    """Best bound ``(-1 + n P^n(T_{B_d(P)}) D(B_d(P) || F_1)) / n`` over a grid of radii."""
    best = -math.inf
    types = enumerate_types(P.alphabet, n)
    for delta in np.linspace(0.0, 0.5, 26):
        mass = sum(iid_weight_of_type_class(P, V) for V in types
                   if 0.5 * float(np.abs(V.freqs - P.weights).sum()) <= delta + 1e-12)
        dists = []
        for b in spec.base:
            v, g = kl_from_tv_ball(P.weights, np.array(b), float(delta))
            dists.append(v - g)
        dball = config.from_nats(min(dists))
        best = max(best, (-1.0 + n * mass * dball) / n)
    return best


def single_letterization_check(P: Distribution, spec: FamilySpec, n: int) -> SingleLetterReport:
    """Compare ``(1/n) D(P^n || co F_n)`` with its single-letter value.

    Composite iid: the target is ``min_B D(P || B)`` and the value lies between
    a ball-based lower bound and the target. Arbitrarily varying: the target is
    ``D(P || co F_1)`` and the value equals it at every ``n``.
    """
    F = realize(spec, n)
    rep = min_kl_to_polytope(tensor_power(P, n), F.polytope)
    value = rep.value / n
    if spec.kind in ("simple_iid", "composite_iid"):
        target = min(kl(P, Distribution(b)) for b in spec.base)
        lower = _ball_lower_bound(P, spec, n)
    elif spec.kind == "arbitrarily_varying":
        t = min_kl_to_polytope(P, realize(spec, 1).polytope)
        target, lower = t.value, t.lower
    else:
        raise DomainError("single-letter values are only known for iid and arbitrarily varying families")
    return SingleLetterReport(n, value, target, lower)
