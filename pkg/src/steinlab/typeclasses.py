"""Method of types: type enumeration, class sizes, and Hamming-ball weights."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import config
from .alphabet import Alphabet, Distribution, all_strings, as_joint, check_dense, tensor_power
from .errors import CapacityError, DomainError
from .kernel import entropy_nats

ENUMERATION_CAP = 10 ** 7


@dataclass(frozen=True)
class Type:
    """Empirical distribution of a length-``n`` string, stored as counts."""

    alphabet: Alphabet
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.alphabet.size or any(c < 0 for c in counts):
            raise DomainError(f"invalid count vector {counts}")
        if sum(counts) < 1:
            raise DomainError("a type needs a positive block length")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def freqs(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n

    def as_distribution(self) -> Distribution:
        return Distribution(self.freqs, self.alphabet, normalize=True)


def _compositions(n: int, k: int) -> Iterator[tuple]:
    """Count vectors of length ``k`` summing to ``n`` in lexicographic order."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def number_of_types(k: int, n: int) -> int:
    return math.comb(n + k - 1, k - 1)


def enumerate_types(alphabet: Alphabet, n: int) -> list[Type]:
    if n < 1:
        raise DomainError("block length must be at least 1")
    if number_of_types(alphabet.size, n) > ENUMERATION_CAP:
        raise CapacityError("too many types to enumerate")
    return [Type(alphabet, c) for c in _compositions(n, alphabet.size)]


def type_of_string(x, alphabet: Alphabet) -> Type:
    idx = alphabet.encode(x)
    if idx.size == 0:
        raise DomainError("empty string has no type")
    return Type(alphabet, tuple(np.bincount(idx, minlength=alphabet.size)))


def type_class_size(V: Type) -> int:
    out = math.factorial(V.n)
    for c in V.counts:
        out //= math.factorial(c)
    return out


@dataclass(frozen=True)
class SandwichReport:
    log_lower: float
    log_size: float
    log_upper: float

    @property
    def margin(self) -> float:
        return min(self.log_size - self.log_lower, self.log_upper - self.log_size)

    @property
    def holds(self) -> bool:
        return self.margin >= -1e-12


def type_class_sandwich(V: Type) -> SandwichReport:
    """Compare ``log |T_V|`` with ``nH(V) - |X| log(n+1)`` and ``nH(V)``."""
    nh = config.from_nats(V.n * entropy_nats(V.freqs))
    log_size = config.from_nats(math.log(type_class_size(V)))
    slack = config.from_nats(V.alphabet.size * math.log(V.n + 1))
    return SandwichReport(nh - slack, log_size, nh)


def _next_permutation(a: list) -> bool:
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return True


def enumerate_type_class(V: Type, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All strings of type ``V`` as symbol-index rows, in lexicographic order."""
    size = type_class_size(V)
    if size > cap:
        raise CapacityError(f"type class has {size} strings, cap is {cap}")
    word = [s for s, c in enumerate(V.counts) for _ in range(c)]
    out = np.empty((size, V.n), dtype=np.int64)
    i = 0
    while True:
        out[i] = word
        i += 1
        if not _next_permutation(word):
            break
    return out


def string_counts(k: int, n: int) -> np.ndarray:
    """Count vector of every string of length ``n``, shape ``(k**n, k)``."""
    strings = all_strings(k, n)
    return np.stack([(strings == s).sum(axis=1) for s in range(k)], axis=1)


def type_class_indices(V: Type) -> np.ndarray:
    counts = string_counts(V.alphabet.size, V.n)
    return np.flatnonzero(np.all(counts == np.array(V.counts), axis=1))


def iid_weight_of_type_class(P, V: Type) -> float:
    """Probability that ``n`` iid draws from ``P`` have type ``V``."""
    if P.n != 1 or P.alphabet != V.alphabet:
        raise DomainError("P must be a single-letter law on the type's alphabet")
    logw = math.log(type_class_size(V))
    for p, c in zip(P.weights, V.counts):
        if c == 0:
            continue
        if p <= 0:
            return 0.0
        logw += c * math.log(p)
    return math.exp(logw)


def type_tv_distance(V, W) -> float:
    a = V.freqs if isinstance(V, Type) else np.asarray(V.weights)
    b = W.freqs if isinstance(W, Type) else np.asarray(W.weights)
    if a.shape != b.shape:
        raise DomainError("alphabet sizes differ")
    return 0.5 * float(np.abs(a - b).sum())


def hamming_distance(x, y) -> int:
    if len(x) != len(y):
        raise DomainError("strings must have equal length")
    return sum(1 for a, b in zip(x, y) if a != b)


@dataclass(frozen=True)
class StringSet:
    """A set of strings of length ``n``, held as sorted dense indices."""

    alphabet: Alphabet
    n: int
    indices: np.ndarray

    def __post_init__(self):
        size = check_dense(self.alphabet.size, self.n)
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= size):
            raise DomainError("string index out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_strings(cls, alphabet: Alphabet, strings) -> "StringSet":
        rows = [alphabet.encode(s) for s in strings]
        if not rows:
            raise DomainError("use from_indices for an empty set")
        n = rows[0].size
        k = alphabet.size
        weights = k ** np.arange(n - 1, -1, -1)
        return cls(alphabet, n, np.array([int(r @ weights) for r in rows]))

    @classmethod
    def from_predicate(cls, alphabet: Alphabet, n: int,
                       predicate: Callable[[tuple], bool]) -> "StringSet":
        strings = all_strings(alphabet.size, n)
        keep = [i for i, row in enumerate(strings) if predicate(tuple(int(s) for s in row))]
        return cls(alphabet, n, np.array(keep, dtype=np.int64))

    def __len__(self):
        return int(self.indices.size)

    def weight(self, P) -> float:
        P = as_joint(P)
        if P.alphabet != self.alphabet or P.n != self.n:
            raise DomainError("law and string set live on different spaces")
        return float(P.weights[self.indices].sum())


def hamming_ball(Y: StringSet, K: int) -> StringSet:
    """Strings within Hamming distance ``K`` of some element of ``Y``."""
    if K < 0:
        raise DomainError("radius must be nonnegative")
    k, n = Y.alphabet.size, Y.n
    size = k ** n
    if len(Y) == 0:
        return Y
    if K >= n:
        return StringSet(Y.alphabet, n, np.arange(size))
    strings = all_strings(k, n)
    place = k ** np.arange(n - 1, -1, -1)
    dist = np.full(size, -1, dtype=np.int64)
    dist[Y.indices] = 0
    frontier = Y.indices
    for level in range(1, K + 1):
        digits = strings[frontier]
        nbrs = []
        for pos in range(n):
            for shift in range(1, k):
                new = (digits[:, pos] + shift) % k
                nbrs.append(frontier + (new - digits[:, pos]) * place[pos])
        cand = np.unique(np.concatenate(nbrs))
        cand = cand[dist[cand] < 0]
        dist[cand] = level
        frontier = cand
        if frontier.size == 0:
            break
    return StringSet(Y.alphabet, n, np.flatnonzero(dist >= 0))


def hamming_ball_weight(Y: StringSet, K: int, P) -> float:
    """``P^n`` mass of the radius-``K`` Hamming blow-up of ``Y``."""
    if len(Y) == 0:
        raise DomainError("Hamming ball of an empty set")
    P = as_joint(P)
    if P.n == 1 and Y.n > 1:
        P = tensor_power(P, Y.n)
    return hamming_ball(Y, K).weight(P)


def concentration_radius(n: int, eps: float, eta: float) -> int:
    """Smallest integer radius ``K >= sqrt(2n ln 1/eps) + sqrt(2n ln 1/eta)``."""
    if not (0 < eps <= 1 and 0 < eta <= 1):
        raise DomainError("eps and eta must lie in (0, 1]")
    K = math.sqrt(2 * n * math.log(1 / eps)) + math.sqrt(2 * n * math.log(1 / eta))
    return int(math.ceil(K - 1e-12))


@dataclass(frozen=True)
class ConcentrationReport:
    set_weight: float
    radius: int
    ball_weight: float
    eta: float

    @property
    def margin(self) -> float:
        return self.ball_weight - (1.0 - self.eta)

    @property
    def holds(self) -> bool:
        return self.margin >= -1e-12


def hamming_concentration_check(P, Y: StringSet, eps: float, eta: float) -> ConcentrationReport:
    """Blow up ``Y`` (which must carry mass at least ``eps``) and measure the ball."""
    Pn = tensor_power(P, Y.n) if P.n == 1 else as_joint(P)
    w = Y.weight(Pn)
    if w < eps - 1e-15:
        raise DomainError(f"set weight {w} is below eps={eps}")
    K = concentration_radius(Y.n, eps, eta)
    return ConcentrationReport(w, K, hamming_ball(Y, K).weight(Pn), eta)
