"""Finite alphabets, distributions over strings, and per-symbol channels.

Joint distributions are dense vectors indexed lexicographically, first
position most significant, so ``weights.reshape((k,) * n)`` is the tensor
view with axis ``i`` belonging to position ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import CapacityError, DomainError
from .kernel import entropy_nats

DENSE_CAP = 2 ** 24
SUM_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if not symbols:
            raise DomainError("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise DomainError("alphabet symbols must be distinct")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def of_size(cls, k: int) -> "Alphabet":
        if k < 1:
            raise DomainError("alphabet size must be positive")
        return cls(tuple(str(i) for i in range(k)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise DomainError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, string) -> np.ndarray:
        """Symbol indices of a string (a ``str`` or any sequence of symbols)."""
        return np.array([self.index(s) for s in string], dtype=np.int64)

    def decode(self, indices) -> tuple:
        return tuple(self.symbols[int(i)] for i in indices)


def check_dense(k: int, n: int) -> int:
    if n < 1:
        raise DomainError("block length must be at least 1")
    if k ** n > DENSE_CAP:
        raise CapacityError(f"dense representation of {k}^{n} entries exceeds {DENSE_CAP}")
    return k ** n


def _validated(weights, size: int, normalize: bool) -> np.ndarray:
    w = np.array(weights, dtype=float).reshape(-1)
    if w.size != size:
        raise DomainError(f"expected {size} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    if np.any(w < -SUM_TOL):
        raise DomainError("weights must be nonnegative")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if normalize:
        if total <= 0:
            raise DomainError("weights must have positive mass")
    elif abs(total - 1.0) > SUM_TOL * max(1.0, size ** 0.5):
        raise DomainError(f"weights sum to {total!r}, not 1")
    w = w / total
    w.setflags(write=False)
    return w


class _Law:
    """Shared behaviour of :class:`Distribution` and :class:`JointDistribution`."""

    alphabet: Alphabet
    weights: np.ndarray

    @property
    def n(self) -> int:
        return 1

    @property
    def tensor(self) -> np.ndarray:
        return self.weights.reshape((self.alphabet.size,) * self.n)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def prob(self, string) -> float:
        idx = self.alphabet.encode(string)
        if idx.size != self.n:
            raise DomainError(f"string length {idx.size} != {self.n}")
        return float(self.weights[string_index(idx, self.alphabet.size)])

    def __eq__(self, other):
        return (isinstance(other, _Law) and self.alphabet == other.alphabet
                and self.n == other.n and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.alphabet, self.n, self.weights.tobytes()))


class Distribution(_Law):
    """Probability vector over a finite alphabet."""

    def __init__(self, weights, alphabet: Alphabet | None = None, *, normalize: bool = False):
        w = np.asarray(weights, dtype=float).reshape(-1)
        self.alphabet = alphabet if alphabet is not None else Alphabet.of_size(w.size)
        self.weights = _validated(w, self.alphabet.size, normalize)

    def __repr__(self):
        return f"Distribution({self.weights.tolist()})"

    def as_joint(self) -> "JointDistribution":
        return JointDistribution(self.weights, self.alphabet, 1)


class JointDistribution(_Law):
    """Distribution over strings of length ``n`` on a common alphabet."""

    def __init__(self, weights, alphabet: Alphabet | int, n: int, *, normalize: bool = False):
        if isinstance(alphabet, int):
            alphabet = Alphabet.of_size(alphabet)
        size = check_dense(alphabet.size, n)
        self.alphabet = alphabet
        self._n = int(n)
        self.weights = _validated(weights, size, normalize)

    @property
    def n(self) -> int:
        return self._n

    def __repr__(self):
        return f"JointDistribution(n={self.n}, {self.weights.tolist()})"


Law = Distribution | JointDistribution


def as_joint(P) -> JointDistribution:
    if isinstance(P, JointDistribution):
        return P
    if isinstance(P, Distribution):
        return P.as_joint()
    raise DomainError(f"expected a distribution, got {type(P).__name__}")


def string_index(indices: Sequence[int], k: int) -> int:
    out = 0
    for i in indices:
        out = out * k + int(i)
    return out


def all_strings(k: int, n: int) -> np.ndarray:
    """Array of shape ``(k**n, n)`` listing strings in index order."""
    check_dense(k, n)
    return np.indices((k,) * n).reshape(n, -1).T.copy()


def same_level(P, Q) -> None:
    if P.alphabet != Q.alphabet:
        raise DomainError("distributions live on different alphabets")
    if P.n != Q.n:
        raise DomainError(f"block lengths differ: {P.n} vs {Q.n}")


@dataclass(frozen=True)
class StochasticChannel:
    """Column-stochastic matrix ``matrix[y, x] = W(y | x)``."""

    matrix: np.ndarray
    input_alphabet: Alphabet
    output_alphabet: Alphabet

    def __init__(self, matrix, input_alphabet: Alphabet | None = None,
                 output_alphabet: Alphabet | None = None):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2:
            raise DomainError("channel matrix must be 2-dimensional")
        if np.any(m < -SUM_TOL) or not np.all(np.isfinite(m)):
            raise DomainError("channel entries must be finite and nonnegative")
        cols = m.sum(axis=0)
        if np.any(np.abs(cols - 1.0) > 1e-9):
            raise DomainError("channel columns must sum to 1")
        m = np.clip(m, 0.0, None) / cols
        m.setflags(write=False)
        ia = input_alphabet if input_alphabet is not None else Alphabet.of_size(m.shape[1])
        oa = output_alphabet if output_alphabet is not None else Alphabet.of_size(m.shape[0])
        if ia.size != m.shape[1] or oa.size != m.shape[0]:
            raise DomainError("channel shape does not match alphabets")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "input_alphabet", ia)
        object.__setattr__(self, "output_alphabet", oa)

    def __eq__(self, other):
        return (isinstance(other, StochasticChannel) and np.array_equal(self.matrix, other.matrix)
                and self.input_alphabet == other.input_alphabet
                and self.output_alphabet == other.output_alphabet)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __call__(self, P: Distribution) -> Distribution:
        if P.n != 1 or P.alphabet != self.input_alphabet:
            raise DomainError("channel input alphabet mismatch")
        return Distribution(self.matrix @ P.weights, self.output_alphabet, normalize=True)


def identity_channel(alphabet: Alphabet) -> StochasticChannel:
    return StochasticChannel(np.eye(alphabet.size), alphabet, alphabet)


def tensor_product(*laws) -> JointDistribution:
    if not laws:
        raise DomainError("tensor product of nothing")
    alphabet = laws[0].alphabet
    n = 0
    w = np.ones(1)
    for P in laws:
        if P.alphabet != alphabet:
            raise DomainError("tensor factors must share an alphabet")
        n += P.n
        check_dense(alphabet.size, n)
        w = np.multiply.outer(w, P.weights).reshape(-1)
    return JointDistribution(w, alphabet, n, normalize=True)


def tensor_power(P, n: int) -> JointDistribution:
    return tensor_product(*([P] * n))


def marginalize(P, keep: Iterable[int]) -> JointDistribution:
    """Marginal on the positions in ``keep``, in their original order."""
    keep = sorted(set(int(i) for i in keep))
    if not keep or keep[0] < 0 or keep[-1] >= P.n:
        raise DomainError(f"invalid positions {keep} for block length {P.n}")
    drop = tuple(i for i in range(P.n) if i not in keep)
    t = P.tensor.sum(axis=drop) if drop else P.tensor
    return JointDistribution(t.reshape(-1), P.alphabet, len(keep), normalize=True)


def permute(P, pi: Sequence[int]) -> JointDistribution:
    """Return ``Q`` with ``Q(x_1..x_n) = P(x_pi(1)..x_pi(n))`` (0-based ``pi``)."""
    pi = [int(i) for i in pi]
    if sorted(pi) != list(range(P.n)):
        raise DomainError(f"{pi} is not a permutation of {P.n} positions")
    t = np.transpose(P.tensor, np.argsort(pi))
    return JointDistribution(t.reshape(-1), P.alphabet, P.n, normalize=True)


def depolarizing(delta: float, R: Distribution) -> StochasticChannel:
    """The channel ``P -> (1 - delta) P + delta R``."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError("delta must lie in [0, 1]")
    k = R.alphabet.size
    m = (1.0 - delta) * np.eye(k) + delta * np.outer(R.weights, np.ones(k))
    return StochasticChannel(m, R.alphabet, R.alphabet)


def apply_matrix_per_symbol(matrix: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """Contract ``matrix`` against every axis of ``tensor``."""
    t = tensor
    for axis in range(t.ndim):
        t = np.moveaxis(np.tensordot(matrix, t, axes=([1], [axis])), 0, axis)
    return t


def apply_channel_per_symbol(W: StochasticChannel, P) -> JointDistribution:
    if P.alphabet != W.input_alphabet:
        raise DomainError("channel input alphabet mismatch")
    t = apply_matrix_per_symbol(W.matrix, P.tensor)
    return JointDistribution(t.reshape(-1), W.output_alphabet, P.n, normalize=True)


def tv_distance(P, Q) -> float:
    same_level(P, Q)
    return 0.5 * float(np.abs(P.weights - Q.weights).sum())


def entropy(P) -> float:
    return config.from_nats(entropy_nats(P.weights))


def point_mass(alphabet: Alphabet, index: int, n: int = 1) -> JointDistribution:
    w = np.zeros(alphabet.size ** n)
    w[index] = 1.0
    return JointDistribution(w, alphabet, n)


def uniform(alphabet: Alphabet, n: int = 1) -> JointDistribution:
    size = check_dense(alphabet.size, n)
    return JointDistribution(np.full(size, 1.0 / size), alphabet, n, normalize=True)


def random_distribution(alphabet: Alphabet, rng: np.random.Generator, n: int = 1,
                        concentration: float = 1.0) -> JointDistribution:
    size = check_dense(alphabet.size, n)
    return JointDistribution(rng.dirichlet(np.full(size, concentration)), alphabet, n,
                             normalize=True)


def log_size(alphabet: Alphabet) -> float:
    return config.from_nats(math.log(alphabet.size))
