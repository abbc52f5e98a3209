"""Optimal type-II errors between hulls, Stein-rate sequences and the converse bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .divergences import (CAPPED_INFINITE, OPTIMAL, DivergenceReport, Polytope, kl,
                          min_kl_between_polytopes, min_kl_to_polytope)
from .errors import DomainError
from .families import FamilySpec, GeneratedSet, realize
from .lp import linprog


def _polytope(X) -> Polytope:
    if isinstance(X, GeneratedSet):
        return X.polytope
    if isinstance(X, Polytope):
        return X
    raise DomainError(f"expected a generated set or polytope, got {type(X).__name__}")


@dataclass
class BetaReport:
    beta: float
    test: np.ndarray
    type1_residual: float

    @property
    def value(self) -> float:
        """``-log beta`` in the active unit (``inf`` when beta vanishes)."""
        return math.inf if self.beta <= 1e-300 else config.from_nats(-math.log(self.beta))


def beta_eps(R, S, eps: float) -> BetaReport:
    """Smallest worst-case type-II error over tests with worst-case type-I error at most ``eps``.

    Solved as the linear program ``min t`` subject to ``<A, Q_j> <= t`` for
    every generator ``Q_j`` of S, ``<1 - A, P_i> <= eps`` for every generator
    ``P_i`` of R and ``0 <= A <= 1``. Both worst cases over a hull are attained
    at generators, so this is exact for the convex hulls.
    """
    R, S = _polytope(R), _polytope(S)
    if R.alphabet != S.alphabet or R.n != S.n:
        raise DomainError("hypotheses live on different spaces")
    if not 0.0 <= eps < 1.0:
        raise DomainError("eps must lie in [0, 1)")
    N = R.generators.shape[1]
    ks, kr = len(S), len(R)
    c = np.zeros(N + 1)
    c[-1] = 1.0
    A_ub = np.zeros((ks + kr, N + 1))
    A_ub[:ks, :N] = S.generators
    A_ub[:ks, N] = -1.0
    A_ub[ks:, :N] = -R.generators
    b_ub = np.concatenate([np.zeros(ks), np.full(kr, -(1.0 - eps))])
    upper = np.concatenate([np.ones(N), [np.inf]])
    res = linprog(c, A_ub, b_ub, upper=upper)
    A = res.x[:N]
    beta = float((S.generators @ A).max())
    resid = max(0.0, float(((1.0 - eps) - R.generators @ A).max()))
    return BetaReport(beta, A, resid)


def d_hyp_sets(R, S, eps: float) -> DivergenceReport:
    b = beta_eps(R, S, eps)
    status = CAPPED_INFINITE if b.beta <= 1e-300 else OPTIMAL
    return DivergenceReport(b.value, b.test, status, b.type1_residual)


@dataclass
class ConverseReport:
    n: int
    eps: float
    divergence: float        # D(co R || co S), Frank-Wolfe value
    divergence_lower: float  # certified lower bound on the same quantity
    d_hyp: float

    @property
    def rhs(self) -> float:
        return -1.0 + (1.0 - self.eps) * self.d_hyp

    @property
    def margin(self) -> float:
        if math.isinf(self.d_hyp):
            return math.inf if math.isinf(self.divergence_lower) else -math.inf
        if math.isinf(self.divergence_lower):
            return math.inf
        return self.divergence_lower - self.rhs

    @property
    def rate_upper(self) -> float:
        """Upper bound on ``D_H^eps / n`` implied by the converse."""
        return (self.divergence_lower + 1.0) / ((1.0 - self.eps) * self.n)


def converse_regularized(R, S, eps: float) -> ConverseReport:
    """Compare ``D(co R || co S)`` with ``-1 + (1 - eps) D_H^eps(co R || co S)``.

    The constant ``-1`` bounds minus the binary entropy in bits, hence also in
    nats, so the inequality holds in either unit.
    """
    Rp, Sp = _polytope(R), _polytope(S)
    div = min_kl_between_polytopes(Rp, Sp)
    dh = d_hyp_sets(Rp, Sp, eps)
    return ConverseReport(Rp.n, eps, div.value, div.lower, dh.value)


_IID = ("simple_iid", "composite_iid")


def single_letter_target(null: FamilySpec, alt: FamilySpec) -> tuple[float | None, str]:
    """Single-letter Stein exponent predicted for a pair of families.

    Returns ``(value, formula)``; ``value`` is ``None`` for pairs without a
    single-letter formula (such as Werner-type or explicit families).
    """
    R1, S1 = realize(null, 1), realize(alt, 1)
    rk, sk = null.kind, alt.kind
    if rk in _IID + ("almost_iid",):
        points = R1.generators if rk in _IID else np.array([null.law])
        if sk in _IID:
            vals = [kl(_law(p), _law(q)) for p in points for q in S1.generators]
            return min(vals), "D(R1||S1)" if rk in _IID else "D(P||S1)"
        if sk == "arbitrarily_varying":
            vals = [min_kl_to_polytope(_law(p), S1.polytope).value for p in points]
            return min(vals), "D(R1||co S1)" if rk in _IID else "D(P||co S1)"
    if rk == "arbitrarily_varying":
        if sk == "arbitrarily_varying":
            return min_kl_between_polytopes(R1.polytope, S1.polytope).value, "D(co R1||co S1)"
        if sk in _IID:
            vals = [min_kl_between_polytopes(R1.polytope, Polytope(S1.alphabet, 1, q[None])).value
                    for q in S1.generators]
            return min(vals), "D(co R1||S1)"
    return None, "none"


def _law(w):
    from .alphabet import Distribution
    return Distribution(np.asarray(w), normalize=True)


@dataclass
class SteinRow:
    n: int
    d_hyp: float
    rate: float
    converse: ConverseReport

    @property
    def converse_rate_upper(self) -> float:
        return self.converse.rate_upper

    @property
    def converse_ok(self) -> bool:
        return self.rate <= self.converse_rate_upper + 1e-5


@dataclass
class SteinSequence:
    eps: float
    rows: list = field(default_factory=list)
    target: float | None = None
    formula: str = "none"

    @property
    def rates(self) -> list[float]:
        return [r.rate for r in self.rows]


def stein_sequence(null: FamilySpec, alt: FamilySpec, eps: float, n_max: int,
                   n_min: int = 1, with_converse: bool = True) -> SteinSequence:
    if n_min < 1 or n_max < n_min:
        raise DomainError("need 1 <= n_min <= n_max")
    target, formula = single_letter_target(null, alt)
    seq = SteinSequence(eps, [], target, formula)
    for n in range(n_min, n_max + 1):
        R, S = realize(null, n), realize(alt, n)
        b = beta_eps(R, S, eps)
        dh = b.value
        if with_converse:
            div = min_kl_between_polytopes(R.polytope, S.polytope)
            conv = ConverseReport(n, eps, div.value, div.lower, dh)
        else:
            conv = ConverseReport(n, eps, math.nan, math.nan, dh)
        seq.rows.append(SteinRow(n, dh, dh / n, conv))
    return seq
