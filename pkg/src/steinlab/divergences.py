"""Relative entropies, smooth and hypothesis-testing variants, and helper functions.

Scalar functions return values in the active log unit (see :mod:`steinlab.config`)
and use ``math.inf`` for an infinite divergence. Optimisation-based quantities
return a :class:`DivergenceReport` whose ``solver_status`` says whether the value
is a finite optimum or an infinite one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .alphabet import (Alphabet, StochasticChannel, apply_matrix_per_symbol, as_joint,
                       same_level)
from .errors import DomainError
from .kernel import (binary_entropy_nats, binary_relative_entropy_nats, entropy_nats,
                     relative_entropy_nats, support_violation)
from .lp import InfeasibleError, linprog
from .projection import kl_between_hulls, kl_projection

OPTIMAL = "optimal"
CAPPED_INFINITE = "capped_infinite"
INFEASIBLE = "infeasible"


@dataclass
class DivergenceReport:
    value: float
    optimizer: object = None
    solver_status: str = OPTIMAL
    residual: float = 0.0

    @property
    def finite(self) -> bool:
        return self.solver_status == OPTIMAL

    @property
    def lower(self) -> float:
        """A certified lower bound on the exact value."""
        return self.value - self.residual if self.finite else self.value


def _check_eps(eps: float, name: str = "eps") -> None:
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"{name} must lie in [0, 1), got {eps}")


def kl(P, Q) -> float:
    same_level(P, Q)
    return config.from_nats(relative_entropy_nats(P.weights, Q.weights))


def d_max(P, Q) -> float:
    same_level(P, Q)
    if support_violation(P.weights, Q.weights):
        return math.inf
    m = P.weights > 0
    return config.from_nats(float(np.log(np.max(P.weights[m] / Q.weights[m]))))


def renyi_half(P, Q) -> float:
    same_level(P, Q)
    fid = float(np.sum(np.sqrt(P.weights * Q.weights)))
    if fid <= 0:
        return math.inf
    return config.from_nats(max(-2.0 * math.log(fid), 0.0))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError("binary entropy needs x in [0, 1]")
    return config.from_nats(binary_entropy_nats(x))


def binary_rel_ent(p: float, q: float) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise DomainError("binary relative entropy needs p, q in [0, 1]")
    return config.from_nats(binary_relative_entropy_nats(p, q))


def f_aux(c: float, x: float) -> float:
    """Piecewise function: ``x log(1/c) + h2(x)`` up to ``1/(c+1)``, then ``log(1 + 1/c)``."""
    if c <= 0:
        raise DomainError("c must be positive")
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x <= 1.0 / (c + 1.0):
        return config.from_nats(x * math.log(1.0 / c) + binary_entropy_nats(x))
    return config.from_nats(math.log1p(1.0 / c))


def g_func(x: float) -> float:
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return 0.0
    return config.from_nats((x + 1) * math.log1p(x) - x * math.log(x))


def _golden(f, a: float, b: float, maximize: bool, iters: int = 200) -> float:
    sign = -1.0 if maximize else 1.0
    phi = (math.sqrt(5) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = sign * f(d)
        if b - a < 1e-15:
            break
    best = min(sign * f(a), sign * f(b), fc, fd)
    return sign * best


@dataclass
class VariationalReport:
    value: float
    sup_form: float
    inf_form: float

    @property
    def sup_error(self) -> float:
        return abs(self.value - self.sup_form)

    @property
    def inf_error(self) -> float:
        return abs(self.value - self.inf_form)


def f_aux_variational_check(c: float, x: float) -> VariationalReport:
    """Recompute ``F_c(x)`` as a supremum over ``[0, x]`` and as an infimum over ``delta``."""
    val = f_aux(c, x)
    lc = config.from_nats(math.log(1.0 / c))
    top = min(x, 1.0)
    sup_form = _golden(lambda y: y * lc + binary_entropy(y), 0.0, top, maximize=True)
    sup_form = max(sup_form, top * lc + binary_entropy(top))

    def inner(d):
        return x * config.from_nats(math.log((1 - d) / (c * d))) + config.from_nats(-math.log1p(-d))

    hi = 1.0 / (c + 1.0)
    inf_form = _golden(inner, 1e-300 if x == 0 else 1e-15, hi, maximize=False)
    inf_form = min(inf_form, inner(hi))
    if x == 0:
        inf_form = max(min(inf_form, 0.0), 0.0)
    return VariationalReport(val, sup_form, inf_form)


def f_aux_pair_margin(c1: float, c2: float, x: float) -> float:
    """``2 F_min(c1, c2)(x) - F_c1(x) - F_c2(x)``, nonnegative by monotonicity."""
    return 2 * f_aux(min(c1, c2), x) - f_aux(c1, x) - f_aux(c2, x)


def d_hyp(P, Q, eps: float) -> DivergenceReport:
    """Hypothesis-testing relative entropy via its linear program over tests."""
    same_level(P, Q)
    _check_eps(eps)
    p, q = P.weights, Q.weights
    res = linprog(q, A_ub=-p[None, :], b_ub=[-(1.0 - eps)], upper=np.ones(p.size))
    A = res.x
    beta = float(q @ A)
    slack = max(0.0, (1.0 - eps) - float(p @ A))
    if beta <= 1e-300:
        return DivergenceReport(math.inf, A, CAPPED_INFINITE, slack)
    return DivergenceReport(config.from_nats(-math.log(beta)), A, OPTIMAL, slack)


def d_max_smooth(P, Q, eps: float) -> DivergenceReport:
    """Smooth max-relative entropy with total-variation smoothing of radius ``eps``."""
    same_level(P, Q)
    _check_eps(eps)
    p, q = P.weights, Q.weights
    N = p.size
    # Variables: P' (N), t, u (N) with u >= P - P' and sum(u) <= eps.
    nv = 2 * N + 1
    c = np.zeros(nv)
    c[N] = 1.0
    rows, rhs = [], []
    for x in range(N):
        r = np.zeros(nv)
        r[x], r[N] = 1.0, -q[x]
        rows.append(r)
        rhs.append(0.0)
    for x in range(N):
        r = np.zeros(nv)
        r[x], r[N + 1 + x] = -1.0, -1.0
        rows.append(r)
        rhs.append(-p[x])
    r = np.zeros(nv)
    r[N + 1:] = 1.0
    rows.append(r)
    rhs.append(eps)
    eq = np.zeros((1, nv))
    eq[0, :N] = 1.0
    upper = np.concatenate([np.ones(N), [np.inf], np.ones(N)])
    try:
        res = linprog(c, np.array(rows), np.array(rhs), eq, [1.0], upper)
    except InfeasibleError:
        return DivergenceReport(math.inf, None, CAPPED_INFINITE, 0.0)
    t = max(res.x[N], 1.0)
    Pp = res.x[:N] / res.x[:N].sum()
    resid = max(0.0, 0.5 * float(np.abs(Pp - p).sum()) - eps)
    return DivergenceReport(config.from_nats(math.log(t)), Pp, OPTIMAL, resid)


@dataclass
class DualitySandwich:
    d_hyp: float
    lower: float            # D_max^{1-eps} + log(1/eps)
    lower_normalized: float  # D_max^{1-eps} + log(1/(1-eps))
    upper: float            # D_max^{1-eps-mu} + log(1/mu)

    @property
    def lower_margin(self) -> float:
        return self.d_hyp - self.lower

    @property
    def lower_normalized_margin(self) -> float:
        return self.d_hyp - self.lower_normalized

    @property
    def upper_margin(self) -> float:
        return self.upper - self.d_hyp


def duality_sandwich_check(P, Q, eps: float, mu: float) -> DualitySandwich:
    """Bracket ``D_H^eps`` between smooth max-relative entropies.

    ``lower`` uses the additive constant ``log(1/eps)``. With normalised
    smoothing it can exceed ``D_H^eps`` when ``eps < 1/2`` (take ``P = Q``);
    ``lower_normalized`` uses ``log(1/(1-eps))``, which is always valid.
    """
    if not (0 < eps < 1 and 0 < mu <= 1 - eps):
        raise DomainError("need 0 < mu <= 1 - eps < 1")
    dh = d_hyp(P, Q, eps).value
    dm_low = d_max_smooth(P, Q, 1 - eps).value
    dm_up = d_max_smooth(P, Q, 1 - eps - mu).value if 1 - eps - mu < 1 else 0.0
    lg = config.from_nats
    return DualitySandwich(dh, dm_low + lg(math.log(1 / eps)),
                           dm_low + lg(math.log(1 / (1 - eps))), dm_up + lg(math.log(1 / mu)))


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many laws on ``alphabet^n``."""

    alphabet: Alphabet
    n: int
    generators: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if g.shape[1] != self.alphabet.size ** self.n or g.shape[0] == 0:
            raise DomainError("generator matrix has the wrong shape")
        if np.any(g < -1e-12) or np.any(np.abs(g.sum(axis=1) - 1) > 1e-9):
            raise DomainError("generators must be probability vectors")
        g = np.clip(g, 0.0, None)
        g = g / g.sum(axis=1, keepdims=True)
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)

    @classmethod
    def from_laws(cls, laws: Sequence) -> "Polytope":
        laws = [as_joint(L) for L in laws]
        if not laws:
            raise DomainError("a polytope needs at least one generator")
        a, n = laws[0].alphabet, laws[0].n
        for L in laws:
            if L.alphabet != a or L.n != n:
                raise DomainError("generators must share alphabet and block length")
        return cls(a, n, np.array([L.weights for L in laws]))

    def __len__(self):
        return self.generators.shape[0]

    def mixture(self, weights) -> np.ndarray:
        return np.asarray(weights, dtype=float) @ self.generators

    def image(self, W: StochasticChannel) -> "Polytope":
        """Generators pushed through ``W`` acting on every symbol."""
        k = self.alphabet.size
        gens = [apply_matrix_per_symbol(W.matrix, g.reshape((k,) * self.n)).reshape(-1)
                for g in self.generators]
        return Polytope(W.output_alphabet, self.n, np.array(gens))


def tv_to_hull(V: np.ndarray, G: np.ndarray) -> float:
    """``min 1/2 ||V - P||_1`` over ``P`` in the hull of the rows of ``G`` (a linear program)."""
    k, N = G.shape
    # variables: lambda (k), u (N) with u >= |V - lambda G|
    c = np.concatenate([np.zeros(k), 0.5 * np.ones(N)])
    A = np.vstack([np.hstack([-G.T, -np.eye(N)]), np.hstack([G.T, -np.eye(N)])])
    b = np.concatenate([-V, V])
    eq = np.concatenate([np.ones(k), np.zeros(N)])[None, :]
    return max(linprog(c, A, b, eq, [1.0]).fun, 0.0)


def _report_from_projection(value_nats: float, gap_nats: float, optimizer) -> DivergenceReport:
    if not np.isfinite(value_nats):
        return DivergenceReport(math.inf, optimizer, CAPPED_INFINITE, 0.0)
    return DivergenceReport(config.from_nats(value_nats), optimizer, OPTIMAL,
                            config.from_nats(gap_nats))


def min_kl_to_polytope(P, F: Polytope, *, tol: float = 1e-8,
                       max_iter: int = 10_000) -> DivergenceReport:
    """``min_{Q in co(F)} D(P || Q)`` by Frank-Wolfe; ``residual`` is the duality gap."""
    P = as_joint(P)
    if P.alphabet != F.alphabet or P.n != F.n:
        raise DomainError("law and polytope live on different spaces")
    r = kl_projection(P.weights, F.generators, tol=tol, max_iter=max_iter)
    return _report_from_projection(float(r.value[0]), float(r.gap[0]), r.mixture[0])


def min_kl_batch(Ps: np.ndarray, F: Polytope, *, tol: float = 1e-8,
                 max_iter: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised projection of many rows; returns ``(values, gaps)`` in the active unit."""
    r = kl_projection(Ps, F.generators, tol=tol, max_iter=max_iter)
    return config.from_nats(r.value), config.from_nats(r.gap)


def min_kl_between_polytopes(R: Polytope, S: Polytope, *, tol: float = 1e-8,
                             max_iter: int = 10_000) -> DivergenceReport:
    """``min D(P || Q)`` over ``P`` in co(R) and ``Q`` in co(S)."""
    if R.alphabet != S.alphabet or R.n != S.n:
        raise DomainError("polytopes live on different spaces")
    r = kl_between_hulls(R.generators, S.generators, tol=tol, max_iter=max_iter)
    return _report_from_projection(r.value, r.gap, (r.left, r.right))


def filtered_kl(P, F: Polytope, W: StochasticChannel) -> DivergenceReport:
    """``D(W P || W co(F))`` with ``W`` applied to every symbol."""
    P = as_joint(P)
    WP = apply_matrix_per_symbol(W.matrix, P.tensor).reshape(-1)
    image = F.image(W)
    r = kl_projection(WP / WP.sum(), image.generators)
    return _report_from_projection(float(r.value[0]), float(r.gap[0]), r.mixture[0])


@dataclass
class BoundCheck:
    """A numerical inequality ``lhs <= rhs``; ``margin = rhs - lhs``."""

    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        if math.isinf(self.rhs) and self.rhs > 0:
            return math.inf
        return self.rhs - self.lhs

    def holds(self, tol: float = 0.0) -> bool:
        return self.margin >= -tol


def entropy_continuity_check(P, Q) -> BoundCheck:
    same_level(P, Q)
    eps = 0.5 * float(np.abs(P.weights - Q.weights).sum())
    k = P.alphabet.size ** P.n
    gap = abs(entropy_nats(P.weights) - entropy_nats(Q.weights))
    return BoundCheck(config.from_nats(gap), f_aux(1.0 / k, eps))


def relent_continuity_bound_check(P_n, Pp_n, F: Polytope, c: float,
                                  eps: float | None = None) -> BoundCheck:
    """Continuity of ``D(. || co F)`` under a total-variation perturbation.

    Both distances are computed by Frank-Wolfe; the left side uses the
    returned value (an over-estimate of the minimum) and the right side the
    certified lower bound, so a reported margin never flatters the bound.
    """
    P_n, Pp_n = as_joint(P_n), as_joint(Pp_n)
    same_level(P_n, Pp_n)
    tv = 0.5 * float(np.abs(P_n.weights - Pp_n.weights).sum())
    if eps is None:
        eps = tv
    if tv > eps + 1e-12:
        raise DomainError("perturbation exceeds eps in total variation")
    if not 0 < c <= 1:
        raise DomainError("c must lie in (0, 1]")
    n = P_n.n
    lhs = min_kl_to_polytope(P_n, F)
    rhs = min_kl_to_polytope(Pp_n, F)
    extra = n * eps * config.from_nats(math.log(1 / c)) + n * g_func(eps) + binary_entropy(min(eps, 1.0))
    return BoundCheck(lhs.value, rhs.lower + extra)


def d_hyp_neyman_pearson(P, Q, eps: float) -> float:
    """``D_H^eps`` from the likelihood-ratio (Neyman-Pearson) test, without an LP.

    Symbols are admitted in decreasing order of ``P/Q`` until the accepted
    ``P``-mass reaches ``1 - eps``; the boundary symbol is randomised.
    """
    same_level(P, Q)
    _check_eps(eps)
    p, q = P.weights, Q.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    ratio = np.where(p > 0, ratio, -1.0)
    order = np.argsort(-ratio, kind="stable")
    need = 1.0 - eps
    beta = 0.0
    for x in order:
        if need <= 1e-15:
            break
        if p[x] <= 0:
            continue
        take = min(1.0, need / p[x])
        need -= take * p[x]
        beta += take * q[x]
    if beta <= 1e-300:
        return math.inf
    return config.from_nats(-math.log(beta))
