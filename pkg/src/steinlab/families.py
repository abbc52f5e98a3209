"""Null and alternative hypothesis families and their finite generator sets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .alphabet import (Alphabet, Distribution, JointDistribution, StochasticChannel,
                       apply_matrix_per_symbol, depolarizing, identity_channel, permute,
                       uniform)
from .divergences import Polytope, tv_to_hull
from .errors import CapacityError, ConfigError, DomainError
from .werner import werner_channel, werner_slack, werner_vertices

KINDS = ("simple_iid", "composite_iid", "arbitrarily_varying", "almost_iid",
         "werner_gamma", "explicit")
GENERATOR_CAP = 10 ** 5
PHI_NAMES = ("zero", "one", "floor_sqrt", "floor_log2")


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of a sequence of hypothesis sets.

    ``base`` holds single-letter laws (simple, composite and arbitrarily
    varying families), ``law`` the iid part of an almost-iid family, ``phi``
    its defect-size function, ``gamma`` the Werner parameter and
    ``generators`` explicit per-level generator lists.
    """

    kind: str
    base: tuple = ()
    law: tuple | None = None
    phi: object = "floor_sqrt"
    gamma: float | None = None
    generators: tuple = ()
    reference: tuple | None = None
    convex: bool = False
    symmetric: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown family kind {self.kind!r}")
        base = tuple(tuple(float(v) for v in b) for b in self.base)
        object.__setattr__(self, "base", base)
        if self.kind in ("simple_iid", "composite_iid", "arbitrarily_varying"):
            if not base:
                raise ConfigError(f"{self.kind} needs a nonempty base")
            if self.kind == "simple_iid" and len(base) != 1:
                raise ConfigError("simple_iid takes exactly one base law")
            sizes = {len(b) for b in base}
            if len(sizes) != 1:
                raise ConfigError("base laws must share an alphabet")
            for b in base:
                Distribution(b)
        if self.kind == "almost_iid":
            if self.law is None:
                raise ConfigError("almost_iid needs 'law'")
            object.__setattr__(self, "law", tuple(float(v) for v in self.law))
            Distribution(self.law)
            phi = self.phi
            if isinstance(phi, (list, tuple)):
                object.__setattr__(self, "phi", tuple(int(v) for v in phi))
            elif isinstance(phi, int):
                if phi < 0:
                    raise ConfigError("phi must be nonnegative")
            elif phi not in PHI_NAMES:
                raise ConfigError(f"phi must be an integer, a list or one of {PHI_NAMES}")
        if self.kind == "werner_gamma":
            if self.gamma is None or not self.gamma >= 1:
                raise ConfigError("werner_gamma needs gamma >= 1")
            object.__setattr__(self, "gamma", float(self.gamma))
        if self.kind == "explicit":
            if not self.generators:
                raise ConfigError("explicit families need per-level generators")
            gens = tuple(tuple(tuple(float(v) for v in g) for g in level)
                         for level in self.generators)
            object.__setattr__(self, "generators", gens)
        if self.reference is not None:
            object.__setattr__(self, "reference", tuple(float(v) for v in self.reference))

    @property
    def alphabet(self) -> Alphabet:
        if self.kind in ("simple_iid", "composite_iid", "arbitrarily_varying"):
            return Alphabet.of_size(len(self.base[0]))
        if self.kind == "almost_iid":
            return Alphabet.of_size(len(self.law))
        if self.kind == "werner_gamma":
            return Alphabet.of_size(2)
        return Alphabet.of_size(len(self.generators[0][0]))

    def phi_at(self, n: int) -> int:
        phi = self.phi
        if isinstance(phi, tuple):
            if n > len(phi):
                raise DomainError(f"phi is only listed up to n={len(phi)}")
            val = phi[n - 1]
        elif isinstance(phi, int):
            val = phi
        else:
            val = {"zero": 0, "one": 1, "floor_sqrt": math.isqrt(n),
                   "floor_log2": int(math.floor(math.log2(n))) if n >= 1 else 0}[phi]
        return max(0, min(int(val), n))

    def reference_law(self) -> Distribution:
        """The law ``R`` used for symbol-by-symbol blurring."""
        if self.reference is not None:
            return Distribution(self.reference, self.alphabet)
        if self.kind in ("simple_iid", "composite_iid", "arbitrarily_varying"):
            return Distribution(np.mean(np.array(self.base), axis=0), self.alphabet,
                                normalize=True)
        return Distribution(uniform(self.alphabet).weights, self.alphabet)

    def filter_channel(self) -> StochasticChannel:
        """Channel under which the family is closed under conditioning on the last symbol."""
        if self.kind == "werner_gamma":
            return werner_channel(self.gamma)
        return identity_channel(self.alphabet)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.base:
            out["base"] = [list(b) for b in self.base]
        if self.kind == "almost_iid":
            out["law"] = list(self.law)
            out["phi"] = list(self.phi) if isinstance(self.phi, tuple) else self.phi
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.generators:
            out["generators"] = [[list(g) for g in level] for level in self.generators]
        if self.reference is not None:
            out["reference"] = list(self.reference)
        if self.kind == "explicit":
            out["convex"] = self.convex
            out["symmetric"] = self.symmetric
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("family must be an object with a 'kind'")
        allowed = {"kind", "base", "law", "phi", "gamma", "generators", "reference",
                   "convex", "symmetric"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown family fields {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class GeneratedSet:
    """Finite generators of the hull of a family at block length ``n``.

    ``symmetric`` records that the set is closed under permutations of
    positions; ``convex`` that the hull of the generators equals the set.
    """

    spec: FamilySpec
    n: int
    polytope: Polytope
    symmetric: bool
    convex: bool

    @property
    def generators(self) -> np.ndarray:
        return self.polytope.generators

    @property
    def alphabet(self) -> Alphabet:
        return self.polytope.alphabet

    def __len__(self):
        return len(self.polytope)

    def laws(self) -> list[JointDistribution]:
        return [JointDistribution(g, self.alphabet, self.n, normalize=True)
                for g in self.generators]


def _power(w: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.multiply.outer(out, w).reshape(-1)
    return out


def _count_generators(spec: FamilySpec, n: int) -> int:
    k = spec.alphabet.size
    if spec.kind == "arbitrarily_varying":
        return len(spec.base) ** n
    if spec.kind == "almost_iid":
        return sum(math.comb(n, r) * k ** r for r in range(spec.phi_at(n) + 1))
    return 0


def realize(spec: FamilySpec, n: int, cap: int = GENERATOR_CAP) -> GeneratedSet:
    if n < 1:
        raise DomainError("block length must be at least 1")
    a = spec.alphabet
    if a.size ** n > 2 ** 24:
        raise CapacityError("block length too large for a dense representation")
    if _count_generators(spec, n) > cap:
        raise CapacityError(f"{spec.kind} at n={n} needs more than {cap} generators")
    kind = spec.kind
    if kind in ("simple_iid", "composite_iid"):
        gens = [_power(np.array(b), n) for b in spec.base]
        sym, cvx = True, kind == "simple_iid"
    elif kind == "arbitrarily_varying":
        base = [np.array(b) for b in spec.base]
        gens = []
        for combo in itertools.product(range(len(base)), repeat=n):
            w = np.ones(1)
            for j in combo:
                w = np.multiply.outer(w, base[j]).reshape(-1)
            gens.append(w)
        sym, cvx = True, False
    elif kind == "almost_iid":
        gens = _almost_iid_generators(np.array(spec.law), n, spec.phi_at(n))
        sym, cvx = True, False
    elif kind == "werner_gamma":
        gens = list(werner_vertices(spec.gamma, n))
        sym, cvx = True, True
    else:
        if n > len(spec.generators):
            raise DomainError(f"explicit family only lists levels up to {len(spec.generators)}")
        gens = [np.array(g) for g in spec.generators[n - 1]]
        sym, cvx = spec.symmetric, spec.convex
    return GeneratedSet(spec, n, Polytope(a, n, np.array(gens)), sym, cvx)


def _almost_iid_generators(P: np.ndarray, n: int, r_max: int) -> list:
    k = P.size
    gens = []
    for r in range(r_max + 1):
        for positions in itertools.combinations(range(n), r):
            for defect in itertools.product(range(k), repeat=r):
                w = np.ones(1)
                fill = dict(zip(positions, defect))
                for pos in range(n):
                    f = np.eye(k)[fill[pos]] if pos in fill else P
                    w = np.multiply.outer(w, f).reshape(-1)
                gens.append(w)
    return gens


def blur_set(F: GeneratedSet, delta: float, R: Distribution) -> GeneratedSet:
    """Apply ``(1 - delta) id + delta R`` to every symbol of every generator."""
    W = depolarizing(delta, R)
    k = F.alphabet.size
    gens = [apply_matrix_per_symbol(W.matrix, g.reshape((k,) * F.n)).reshape(-1)
            for g in F.generators]
    return GeneratedSet(F.spec, F.n, Polytope(F.alphabet, F.n, np.array(gens)),
                        F.symmetric, F.convex)


def membership_distance(spec: FamilySpec, F: GeneratedSet, points: np.ndarray) -> np.ndarray:
    """How far each row of ``points`` is from the family at level ``F.n``.

    Werner families use their defining inequalities (the returned number is
    the violation, zero for members); other families use the relative
    total-variation distance to the hull of the generators (an exact LP).
    """
    points = np.atleast_2d(points)
    if spec.kind == "werner_gamma":
        return np.array([max(0.0, -werner_slack(JointDistribution(p, F.alphabet, F.n,
                                                                  normalize=True), spec.gamma))
                         for p in points])
    return np.array([tv_to_hull(p / p.sum(), F.generators) for p in points])


@dataclass
class ProbeReport:
    axiom: str
    n: int
    passed: bool
    margin: float
    counterexamples: list = field(default_factory=list)


MEMBER_TOL = 1e-6
AXIOMS = ("I", "II", "II+", "III", "IV")


def _random_members(F: GeneratedSet, rng: np.random.Generator, count: int) -> np.ndarray:
    lam = rng.dirichlet(np.full(len(F), 0.5), size=count)
    pts = np.vstack([F.generators, lam @ F.generators])
    return pts


def axiom_probe(spec: FamilySpec, n: int, axiom: str, *, R: Distribution | None = None,
                rng: np.random.Generator | None = None, trials: int = 20) -> ProbeReport:
    """Numerically probe one structural axiom at block length ``n``.

    I: closure under symbol-by-symbol depolarisation towards ``R``;
    II: tensor powers of single-letter members are members;
    II+: tensor products of members at smaller lengths are members;
    III: closure under permutations of positions;
    IV: exact type-class decay (a Sanov-type surrogate).
    The margin is minus the worst membership distance (or the worst Sanov
    margin for IV); the probe passes when it is at least ``-1e-6``.
    """
    if axiom not in AXIOMS:
        raise DomainError(f"axiom must be one of {AXIOMS}")
    rng = rng if rng is not None else np.random.default_rng(0)
    F = realize(spec, n)
    k = F.alphabet.size
    bad: list = []
    if axiom == "I":
        R = R if R is not None else spec.reference_law()
        members = _random_members(F, rng, trials)
        worst = 0.0
        for delta in (0.1, 0.3, 0.6, 0.9):
            W = depolarizing(delta, R)
            blurred = np.array([apply_matrix_per_symbol(W.matrix, m.reshape((k,) * n)).reshape(-1)
                                for m in members])
            dist = membership_distance(spec, F, blurred)
            worst = max(worst, float(dist.max()))
            bad += [(delta, i) for i in np.flatnonzero(dist > MEMBER_TOL)[:3]]
        margin = -worst
    elif axiom == "II":
        F1 = realize(spec, 1)
        singles = _random_members(F1, rng, trials) if F1.convex else F1.generators
        powers = np.array([_power(s, n) for s in singles])
        dist = membership_distance(spec, F, powers)
        margin = -float(dist.max())
        bad = [tuple(singles[i]) for i in np.flatnonzero(dist > MEMBER_TOL)[:3]]
    elif axiom == "II+":
        if n < 2:
            return ProbeReport(axiom, n, True, 0.0)
        worst = 0.0
        for m in range(1, n):
            A, B = realize(spec, m), realize(spec, n - m)
            prods = np.array([np.multiply.outer(a, b).reshape(-1)
                              for a in A.generators for b in B.generators])
            dist = membership_distance(spec, F, prods)
            worst = max(worst, float(dist.max()))
            bad += [(m, i) for i in np.flatnonzero(dist > MEMBER_TOL)[:3]]
        margin = -worst
    elif axiom == "III":
        members = _random_members(F, rng, trials)
        worst = 0.0
        for pi in itertools.permutations(range(n)):
            moved = np.array([permute(JointDistribution(m, F.alphabet, n, normalize=True),
                                      pi).weights for m in members])
            dist = membership_distance(spec, F, moved)
            worst = max(worst, float(dist.max()))
            if dist.max() > MEMBER_TOL:
                bad.append(pi)
        margin = -worst
    else:
        from .bounds import sanov_type_bound_check
        from .typeclasses import enumerate_types
        margins = [sanov_type_bound_check(spec, n, V).margin for V in enumerate_types(F.alphabet, n)]
        margin = float(min(margins))
        return ProbeReport(axiom, n, margin >= -1e-12, margin)
    return ProbeReport(axiom, n, margin >= -MEMBER_TOL, margin, bad)
