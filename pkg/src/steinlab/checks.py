"""Registered numerical checks run by scenarios.

A check receives the scenario, a seeded random generator and its parameter
overrides, and returns a :class:`CheckResult` with one table. Hard checks
decide the exit status of a run; soft checks are reported diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from .alphabet import Alphabet, Distribution, JointDistribution, tensor_power
from .bounds import (blurring_rhs, definetti_constrained_check, definetti_type_bound,
                     filtered_superadditivity_check, meta_lemma_phi, nasty_estimate_check,
                     o_tilde, sanov_type_bound_check, single_letterization_check, theta,
                     transition_bound_check, type_distance_test)
from .divergences import (Polytope, d_hyp, d_hyp_neyman_pearson, duality_sandwich_check,
                          entropy_continuity_check, f_aux_pair_margin, f_aux_variational_check,
                          kl, min_kl_to_polytope, relent_continuity_bound_check)
from .errors import CapacityError, DomainError
from .families import FamilySpec, axiom_probe, realize
from .stein import converse_regularized, single_letter_target, stein_sequence
from .typeclasses import (StringSet, enumerate_types, hamming_concentration_check,
                          number_of_types, type_class_sandwich, type_class_size)
from .werner import ansatz_two, werner_membership


@dataclass
class CheckResult:
    name: str
    passed: bool
    hard: bool
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    anchor: str
    hard: bool
    func: Callable
    defaults: dict


REGISTRY: dict[str, Check] = {}


def register(name: str, description: str, anchor: str, hard: bool = True, **defaults):
    def wrap(func):
        REGISTRY[name] = Check(name, description, anchor, hard, func, defaults)
        return func
    return wrap


def _u(label: str) -> str:
    return f"{label}[{config.unit_name()}]"


def _rand_law(rng, k):
    return Distribution(rng.dirichlet(np.ones(k)), normalize=True)


def _iid_like(spec: FamilySpec) -> bool:
    return spec.kind in ("simple_iid", "composite_iid", "arbitrarily_varying")


# ---------------------------------------------------------------------------------------

@register("stein-sequence", "Stein rates (1/n) D_H^eps between hulls with single-letter target and converse bound",
          "doubly composite Stein lemma; single-letter formulas for iid/av hypotheses", target_tol=None)
def _stein(sc, rng, p):
    cols = ["n", _u("d_hyp"), _u("rate"), _u("converse_rate_upper"), _u("divergence_lower"),
            _u("converse_margin"), _u("target")]
    rows, ok, last = [], True, None
    target, formula = single_letter_target(sc.null, sc.alt)
    summary = {"formula": formula, "target": target}
    for n in range(1, sc.n_max + 1):
        try:
            r = stein_sequence(sc.null, sc.alt, sc.eps, n, n_min=n).rows[0]
        except CapacityError as exc:
            exc.partial = (False, cols, rows, summary | {"capped_at_n": n})
            raise
        rows.append([r.n, r.d_hyp, r.rate, r.converse_rate_upper, r.converse.divergence_lower,
                     r.converse.margin, target if target is not None else math.nan])
        ok &= math.isfinite(r.rate) and r.converse_ok and r.converse.margin >= -1e-5
        last = r
    summary["final_rate"] = last.rate
    if target is not None:
        summary["final_gap"] = abs(last.rate - target)
        if p["target_tol"] is not None:
            ok &= summary["final_gap"] <= p["target_tol"]
    return ok, cols, rows, summary


@register("converse-bound", "D(co R||co S) >= -1 + (1-eps) D_H^eps(co R||co S) on random finitely generated pairs",
          "handy inequality from optimising over tests", pairs=30, n_values=[1, 2, 3], max_generators=3)
def _converse(sc, rng, p):
    cols = ["trial", "n", "alphabet", _u("divergence_lower"), _u("d_hyp"), _u("margin")]
    rows, worst = [], math.inf
    for t in range(p["pairs"]):
        n = int(p["n_values"][t % len(p["n_values"])])
        k = 2 if n == 3 else int(rng.integers(2, 4))
        a = Alphabet.of_size(k)
        N = k ** n
        R = Polytope(a, n, rng.dirichlet(np.ones(N), size=int(rng.integers(1, p["max_generators"] + 1))))
        S = Polytope(a, n, rng.dirichlet(np.ones(N), size=int(rng.integers(1, p["max_generators"] + 1))))
        rep = converse_regularized(R, S, sc.eps)
        rows.append([t, n, k, rep.divergence_lower, rep.d_hyp, rep.margin])
        worst = min(worst, rep.margin)
    return worst >= -1e-5, cols, rows, {"min_margin": worst}


@register("duality-sandwich", "Smooth max-relative entropy brackets around D_H^eps",
          "weak/strong converse duality", instances=100, eps=0.3, mu=0.2)
def _sandwich(sc, rng, p):
    cols = ["instance", "alphabet", _u("d_hyp"), _u("lower_margin_literal"),
            _u("lower_margin_normalized"), _u("upper_margin")]
    rows = []
    lit = norm = up = math.inf
    for i in range(p["instances"]):
        k = int(rng.integers(2, 4))
        P, Q = _rand_law(rng, k), _rand_law(rng, k)
        s = duality_sandwich_check(P, Q, p["eps"], p["mu"])
        rows.append([i, k, s.d_hyp, s.lower_margin, s.lower_normalized_margin, s.upper_margin])
        lit, norm, up = min(lit, s.lower_margin), min(norm, s.lower_normalized_margin), min(up, s.upper_margin)
    ok = norm >= -1e-6 and up >= -1e-6
    return ok, cols, rows, {"min_lower_margin_literal": lit, "min_lower_margin_normalized": norm,
                            "min_upper_margin": up,
                            "literal_violations": sum(1 for r in rows if r[3] < -1e-6)}


@register("dhyp-crosscheck", "LP value of D_H^eps against the Neyman-Pearson likelihood-ratio test",
          "definition of the hypothesis-testing relative entropy", instances=200)
def _dhyp(sc, rng, p):
    cols = ["instance", "alphabet", "eps", _u("lp"), _u("neyman_pearson"), _u("abs_diff")]
    rows, worst = [], 0.0
    for i in range(p["instances"]):
        k = int(rng.integers(2, 4))
        P, Q = _rand_law(rng, k), _rand_law(rng, k)
        e = float(rng.uniform(0.01, 0.9))
        a, b = d_hyp(P, Q, e).value, d_hyp_neyman_pearson(P, Q, e)
        rows.append([i, k, e, a, b, abs(a - b)])
        worst = max(worst, abs(a - b))
    return worst <= 1e-7, cols, rows, {"max_abs_diff": worst}


@register("sanov-type-bound", "Exact type-class weights against exp(-n min D(V||B))",
          "Sanov's theorem in the form of type-class bounds", n_max=8)
def _sanov(sc, rng, p):
    cols = ["family", "n", "type", "weight", "bound", "margin"]
    rows, worst = [], math.inf
    for role, spec in (("null", sc.null), ("alternative", sc.alt)):
        if not _iid_like(spec):
            continue
        for n in range(1, min(p["n_max"], sc.n_max) + 1):
            for V in enumerate_types(spec.alphabet, n):
                b = sanov_type_bound_check(spec, n, V)
                rows.append([role, n, "-".join(map(str, V.counts)), b.lhs, b.rhs, b.margin])
                worst = min(worst, b.margin)
    return worst >= -1e-12, cols, rows, {"min_margin": worst if rows else None}


@register("type-counting", "Number of types, class sizes summing to |X|^n, and the class-size sandwich",
          "standard counting argument for type classes", n_max=12, max_alphabet=3)
def _types(sc, rng, p):
    cols = ["alphabet", "n", "types", "formula", "class_size_sum", "strings", _u("min_sandwich_margin")]
    rows, ok = [], True
    for k in range(2, p["max_alphabet"] + 1):
        a = Alphabet.of_size(k)
        for n in range(1, p["n_max"] + 1):
            types = enumerate_types(a, n)
            total = sum(type_class_size(V) for V in types)
            margin = min(type_class_sandwich(V).margin for V in types)
            rows.append([k, n, len(types), number_of_types(k, n), total, k ** n, margin])
            ok &= len(types) == number_of_types(k, n) and total == k ** n and margin >= -1e-12
    return ok, cols, rows, {}


@register("hamming-concentration", "Hamming blow-ups of sets with mass >= eps carry mass >= 1 - eta",
          "concentration lemma for Hamming neighbourhoods", n=10, trials=100, eps=[0.1, 0.3], eta=[0.1, 0.5])
def _hamming(sc, rng, p):
    n = p["n"]
    a = Alphabet.of_size(2)
    cols = ["trial", "eps", "eta", "set_size", "set_weight", "radius", "ball_weight", "margin"]
    rows, fails = [], 0
    for t in range(p["trials"]):
        P = _rand_law(rng, 2)
        Pn = tensor_power(P, n).weights
        for eps in p["eps"]:
            order = rng.permutation(2 ** n)
            cum = np.cumsum(Pn[order])
            stop = int(np.searchsorted(cum, eps)) + 1
            Y = StringSet(a, n, order[:stop])
            for eta in p["eta"]:
                r = hamming_concentration_check(P, Y, eps, eta)
                rows.append([t, eps, eta, len(Y), r.set_weight, r.radius, r.ball_weight, r.margin])
                fails += not r.holds
    return fails == 0, cols, rows, {"failures": fails}


@register("f-aux-identities", "F_c as a supremum, as an infimum, and the two-constant inequality",
          "properties of the auxiliary function", grid=50)
def _faux(sc, rng, p):
    cols = ["c", "x", _u("value"), _u("sup_error"), _u("inf_error"), _u("pair_margin")]
    rows, worst_err, worst_pair = [], 0.0, math.inf
    cs = np.linspace(0.02, 1.0, p["grid"])
    xs = np.linspace(0.0, 1.0, p["grid"])
    for i, c in enumerate(cs):
        c2 = cs[(i * 7 + 3) % len(cs)]
        for x in xs:
            v = f_aux_variational_check(float(c), float(x))
            pm = f_aux_pair_margin(float(c), float(c2), float(x))
            rows.append([c, x, v.value, v.sup_error, v.inf_error, pm])
            worst_err = max(worst_err, v.sup_error, v.inf_error)
            worst_pair = min(worst_pair, pm)
    return worst_err <= 1e-7 and worst_pair >= -1e-12, cols, rows, {
        "max_variational_error": worst_err, "min_pair_margin": worst_pair}


def _av_default(sc) -> FamilySpec:
    for spec in (sc.alt, sc.null):
        if spec.kind == "arbitrarily_varying":
            return spec
    return FamilySpec("arbitrarily_varying", base=[[0.5, 0.5], [0.3, 0.7]])


@register("continuity-bounds", "Entropy and relative-entropy continuity under total-variation perturbations",
          "asymptotic continuity lemmas", instances=200, n=2)
def _continuity(sc, rng, p):
    cols = ["kind", "instance", "tv", _u("lhs"), _u("rhs"), _u("margin")]
    rows, worst = [], math.inf
    for i in range(p["instances"]):
        k = int(rng.integers(2, 5))
        P = _rand_law(rng, k)
        Q = Distribution((1 - (t := rng.uniform())) * P.weights + t * rng.dirichlet(np.ones(k)), normalize=True)
        b = entropy_continuity_check(P, Q)
        tv = 0.5 * float(np.abs(P.weights - Q.weights).sum())
        rows.append(["entropy", i, tv, b.lhs, b.rhs, b.margin])
        worst = min(worst, b.margin)
    spec = _av_default(sc)
    R = spec.reference_law()
    c = float(R.weights[R.weights > 0].min())
    n = p["n"]
    F = realize(spec, n).polytope
    N = spec.alphabet.size ** n
    for i in range(p["instances"]):
        Pn = JointDistribution(rng.dirichlet(np.ones(N)), spec.alphabet, n, normalize=True)
        t = float(rng.uniform(0, 0.5))
        Pp = JointDistribution((1 - t) * Pn.weights + t * rng.dirichlet(np.ones(N)), spec.alphabet, n,
                               normalize=True)
        b = relent_continuity_bound_check(Pn, Pp, F, c)
        tv = 0.5 * float(np.abs(Pn.weights - Pp.weights).sum())
        rows.append(["relative_entropy", i, tv, b.lhs, b.rhs, b.margin])
        worst = min(worst, b.margin)
    return worst >= -1e-6, cols, rows, {"min_margin": worst}


def random_symmetric(a: Alphabet, n: int, rng) -> JointDistribution:
    from .typeclasses import type_class_indices
    types = enumerate_types(a, n)
    w = rng.dirichlet(np.full(len(types), 0.5))
    out = np.zeros(a.size ** n)
    for V, wv in zip(types, w):
        idx = type_class_indices(V)
        out[idx] += wv / idx.size
    return JointDistribution(out, a, n, normalize=True)


@register("definetti-type-bound", "Symmetric Q_n <= (n+1)^|X| sum_V V^n entry-wise",
          "universal de Finetti reduction", instances=100, n_max=6)
def _definetti(sc, rng, p):
    cols = ["instance", "alphabet", "n", "ratio", "bound", "violations"]
    rows, bad = [], 0
    for i in range(p["instances"]):
        k = 2 + i % 2
        n = int(rng.integers(1, p["n_max"] + 1))
        Q = random_symmetric(Alphabet.of_size(k), n, rng)
        r = definetti_type_bound(Q)
        rows.append([i, k, n, r.ratio, r.bound, r.violations])
        bad += r.violations
    return bad == 0, cols, rows, {"violations": bad}


@register("definetti-constrained", "Monte Carlo coverage of the constrained de Finetti reduction",
          "classical constrained de Finetti reduction", hard=False, n=3, delta=1.0, samples=100000,
          members=5, coverage=0.99)
def _definetti_constrained(sc, rng, p):
    spec = next((s for s in (sc.null, sc.alt) if s.kind == "composite_iid"),
                FamilySpec("composite_iid", base=[[0.8, 0.2], [0.6, 0.4]]))
    n = p["n"]
    F = realize(spec, n)
    cols = ["member", "coverage", "min_ratio"]
    rows, worst = [], 1.0
    lam = np.vstack([np.eye(len(F)), rng.dirichlet(np.ones(len(F)), size=p["members"])])
    for j, weights in enumerate(lam):
        Q = JointDistribution(weights @ F.generators, F.alphabet, n, normalize=True)
        r = definetti_constrained_check(spec, Q, p["delta"], p["samples"], rng)
        rows.append([j, r.coverage, float(np.min(r.estimate / np.maximum(r.target, 1e-300)))])
        worst = min(worst, r.coverage)
    return worst >= p["coverage"], cols, rows, {"min_coverage": worst}


@register("filtered-superadditivity", "D(P_1..P_n||F_n) >= D(P_1..P_{n-1}||F_{n-1}) + D^W(P_n||F_1)",
          "superadditivity of the filtered relative entropy", lists=100, n_values=[2, 3])
def _superadd(sc, rng, p):
    fams = [FamilySpec("werner_gamma", gamma=2.0),
            FamilySpec("composite_iid", base=[[0.8, 0.2], [0.5, 0.5]])]
    for s in (sc.null, sc.alt):
        if s.kind in ("werner_gamma", "composite_iid", "arbitrarily_varying") and s not in fams:
            fams.append(s)
    cols = ["family", "n", "list", _u("lhs_lower"), _u("rhs"), _u("margin")]
    rows, worst = [], math.inf
    for spec in fams:
        k = spec.alphabet.size
        for n in p["n_values"]:
            for i in range(p["lists"]):
                laws = [_rand_law(rng, k) for _ in range(n)]
                b = filtered_superadditivity_check(laws, spec)
                rows.append([spec.kind, n, i, b.rhs, b.lhs, b.margin])
                worst = min(worst, b.margin)
    return worst >= -1e-5, cols, rows, {"min_margin": worst}


@register("single-letterization", "(1/n) D(P^n||co F_n) against its single-letter value",
          "single-letter formulas for iid and arbitrarily varying sets", laws=5, n_max=4)
def _single(sc, rng, p):
    cols = ["family", "law", "n", _u("value"), _u("target"), _u("lower"), _u("upper_margin"), _u("lower_margin")]
    rows, ok = [], True
    for role, spec in (("null", sc.null), ("alternative", sc.alt)):
        if not _iid_like(spec):
            continue
        for i in range(p["laws"]):
            P = _rand_law(rng, spec.alphabet.size)
            for n in range(1, min(p["n_max"], sc.n_max) + 1):
                r = single_letterization_check(P, spec, n)
                rows.append([role, i, n, r.value, r.target, r.lower, r.upper_margin, r.lower_margin])
                ok &= r.upper_margin >= -1e-6 and r.lower_margin >= -1e-6
    return ok, cols, rows, {}


@register("example-werner", "Werner-type family: D((1,0)||F_1) = log 2 and the level-two ansatz",
          "additivity violation example", gammas=[1.5, 2.0, 2.5])
def _werner(sc, rng, p):
    gammas = p["gammas"]
    if sc.null.kind == "werner_gamma":
        gammas = sorted(set(gammas) | {sc.null.gamma})
    cols = ["gamma", _u("D1"), _u("log2"), _u("half_D2_optimizer"), _u("half_D2_ansatz"),
            _u("half_log_gamma_plus_1"), _u("margin")]
    rows, ok = [], True
    P1 = Distribution([1.0, 0.0])
    for g in gammas:
        spec = FamilySpec("werner_gamma", gamma=g)
        d1 = min_kl_to_polytope(P1, realize(spec, 1).polytope).value
        d2 = min_kl_to_polytope(tensor_power(P1, 2), realize(spec, 2).polytope).value / 2
        Q2 = JointDistribution(ansatz_two(g), 2, 2)
        ans = kl(tensor_power(P1, 2), Q2) / 2
        bound = config.from_nats(math.log(g + 1)) / 2
        margin = bound - min(d2, ans)
        rows.append([g, d1, 1.0 if config.unit_name() == "bits" else math.log(2), d2, ans, bound, margin])
        ok &= abs(d1 - config.from_nats(math.log(2))) <= 1e-6
        ok &= d2 <= bound + 1e-6 and ans <= bound + 1e-6 and werner_membership(Q2, g)
    return ok, cols, rows, {}


@register("axiom-probes", "Numerical probes of the structural axioms for both families",
          "axioms on sequences of hypothesis sets", hard=False, n_max=3)
def _probes(sc, rng, p):
    cols = ["family", "kind", "n", "axiom", "passed", "margin"]
    rows = []
    for role, spec in (("null", sc.null), ("alternative", sc.alt)):
        for n in range(1, min(p["n_max"], sc.n_max) + 1):
            for ax in ("I", "II", "II+", "III", "IV"):
                try:
                    r = axiom_probe(spec, n, ax, rng=rng)
                except DomainError:
                    continue
                rows.append([role, spec.kind, n, ax, r.passed, r.margin])
    return True, cols, rows, {}


@register("transition-bound", "Per-symbol depolarisation reaches y from x with probability >= (1-d)^n (c d/(1-d))^dist",
          "transition probability lemma", instances=200, n_max=8)
def _transition(sc, rng, p):
    cols = ["instance", "n", "distance", "delta", _u("log_bound"), _u("log_exact"), _u("margin")]
    rows, worst = [], math.inf
    for i in range(p["instances"]):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(1, p["n_max"] + 1))
        R = _rand_law(rng, k)
        x, y = rng.integers(0, k, n), rng.integers(0, k, n)
        c = float(R.weights[y].min()) * float(rng.uniform(0.5, 1.0))
        delta = float(rng.uniform(1e-3, 1.0)) / (c + 1)
        xs, ys = R.alphabet.decode(x), R.alphabet.decode(y)
        b = transition_bound_check(xs, ys, delta, R, c)
        rows.append([i, n, int((x != y).sum()), delta, b.lhs, b.rhs, b.margin])
        worst = min(worst, b.margin)
    return worst >= -1e-12, cols, rows, {"min_margin": worst}


@register("nasty-estimate", "P^n(x) <= (n+1)^|X| exp[n F_{1/|X|}(s)] / |T_{V_y}| when d(x,y) <= ns",
          "string-probability estimate via nearby types", instances=200, n_max=10)
def _nasty(sc, rng, p):
    cols = ["instance", "n", "distance", _u("log_prob"), _u("log_bound"), _u("margin")]
    rows, worst = [], math.inf
    for i in range(p["instances"]):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(1, p["n_max"] + 1))
        P = _rand_law(rng, k)
        x = rng.choice(k, n, p=P.weights)
        y = x.copy()
        flips = rng.random(n) < rng.uniform(0, 0.5)
        y[flips] = rng.integers(0, k, flips.sum())
        b = nasty_estimate_check(P, P.alphabet.decode(x), P.alphabet.decode(y))
        rows.append([i, n, int((x != y).sum()), b.lhs, b.rhs, b.margin])
        worst = min(worst, b.margin)
    return worst >= -1e-12, cols, rows, {"min_margin": worst}


@register("meta-lemma-rates", "phi(xi) decreases to 0 with xi; blurring-lemma rate terms by n",
          "explicit rates in the blurring and meta lemmas", alphabet=2, c=0.5)
def _meta(sc, rng, p):
    k, c = p["alphabet"], p["c"]
    cols = ["xi", "n", _u("phi"), "theta", _u("o_tilde"), _u("blurring_rhs_at_zero")]
    rows = []
    xis = [0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4, 1e-6, 1e-8]
    phis = []
    for xi in xis:
        ph = meta_lemma_phi(xi, c, k)
        phis.append(ph)
        for n in (10, 100, 1000, 10 ** 6):
            rows.append([xi, n, ph, theta(xi, n, 0.5, k), o_tilde(n, 0.5, k),
                         blurring_rhs(0.0, 0.0, xi, n, c, k)])
    mono = all(a >= b - 1e-15 for a, b in zip(phis, phis[1:]))
    return mono and phis[-1] < phis[0], cols, rows, {"phi_smallest_xi": phis[-1]}


@register("type-distance-test", "Type-distance test: worst-case errors and the type-II exponent",
          "achievability via tests on empirical types", hard=False, n_max=8, delta=0.15)
def _typetest(sc, rng, p):
    cols = ["n", "alpha", "beta", _u("exponent")]
    rows = []
    for n in range(1, min(p["n_max"], sc.n_max) + 1):
        r = type_distance_test(sc.null, sc.alt, n, p["delta"])
        rows.append([n, r.alpha, r.beta, r.exponent])
    return True, cols, rows, {}


def run_check(name: str, scenario, rng: np.random.Generator, overrides: dict | None = None) -> CheckResult:
    chk = REGISTRY[name]
    params = dict(chk.defaults)
    params.update(overrides or {})
    passed, cols, rows, summary = chk.func(scenario, rng, params)
    return CheckResult(name, bool(passed), chk.hard, cols, rows, summary)


def partial_result(name: str, exc: CapacityError) -> CheckResult | None:
    """Rows a check managed to finish before hitting a capacity limit, if it kept them."""
    part = getattr(exc, "partial", None)
    if part is None:
        return None
    passed, cols, rows, summary = part
    return CheckResult(name, False, REGISTRY[name].hard, cols, rows, summary)
