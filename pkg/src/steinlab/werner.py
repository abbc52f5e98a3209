"""The Werner-type family ``{Q : H^{(x)n} Q >= 0}`` with ``H = [[gamma, 1], [-1, 1]]``."""
from __future__ import annotations

import itertools
import json
from functools import lru_cache
from importlib import resources

import numpy as np

from .alphabet import StochasticChannel, apply_matrix_per_symbol, as_joint
from .errors import CapacityError, DomainError

MEMBERSHIP_TOL = 1e-10
MAX_LEVEL = 3


def h_matrix(gamma: float) -> np.ndarray:
    return np.array([[gamma, 1.0], [-1.0, 1.0]])


def werner_channel(gamma: float) -> StochasticChannel:
    """Input 0 is kept; input 1 is flipped to 0 with probability ``1/gamma``."""
    if gamma < 1:
        raise DomainError("gamma must be at least 1")
    return StochasticChannel([[1.0, 1.0 / gamma], [0.0, 1.0 - 1.0 / gamma]])


def werner_slack(Q, gamma: float) -> float:
    """Smallest entry of ``H^{(x)n} Q``; nonnegative exactly for members."""
    Q = as_joint(Q)
    if Q.alphabet.size != 2:
        raise DomainError("the Werner family lives on a binary alphabet")
    return float(apply_matrix_per_symbol(h_matrix(gamma), Q.tensor).min())


def werner_membership(Q, gamma: float) -> bool:
    return werner_slack(Q, gamma) >= -MEMBERSHIP_TOL


def _constraint_rows(gamma: float, n: int) -> np.ndarray:
    H = np.ones((1, 1))
    for _ in range(n):
        H = np.kron(H, h_matrix(gamma))
    return np.vstack([np.eye(2 ** n), H])


def enumerate_vertices(gamma: float, n: int) -> np.ndarray:
    """Vertices of the level-``n`` set by brute-force search over active constraints."""
    if n > MAX_LEVEL:
        raise CapacityError(f"vertex enumeration is limited to n <= {MAX_LEVEL}")
    N = 2 ** n
    rows = _constraint_rows(gamma, n)
    combos = np.array(list(itertools.combinations(range(rows.shape[0]), N - 1)))
    M = np.empty((len(combos), N, N))
    M[:, 0, :] = 1.0
    M[:, 1:, :] = rows[combos]
    sv = np.linalg.svd(M, compute_uv=False)
    ok = sv[:, -1] > 1e-10 * sv[:, 0]
    rhs = np.zeros((ok.sum(), N, 1))
    rhs[:, 0, 0] = 1.0
    pts = np.linalg.solve(M[ok], rhs)[:, :, 0]
    feas = np.all(pts @ rows.T >= -1e-10, axis=1)
    pts = pts[feas]
    pts[np.abs(pts) < 1e-13] = 0.0
    pts = np.clip(pts, 0.0, None)
    pts /= pts.sum(axis=1, keepdims=True)
    keys = np.round(pts, 10)
    _, first = np.unique(keys, axis=0, return_index=True)
    out = pts[np.sort(first)]
    order = np.lexsort(np.round(out, 10).T[::-1])
    return out[order]


@lru_cache(maxsize=None)
def _fixtures() -> dict:
    text = resources.files("steinlab").joinpath("data/werner_vertices.json").read_text()
    return json.loads(text)


def werner_vertices(gamma: float, n: int) -> np.ndarray:
    """Vertex list, read from the exact-rational fixtures when available."""
    table = _fixtures().get("vertices", {})
    entry = table.get(repr(float(gamma)), {}).get(str(n))
    if entry is not None:
        from fractions import Fraction
        pts = np.array([[float(Fraction(v)) for v in row] for row in entry])
        return pts / pts.sum(axis=1, keepdims=True)
    return enumerate_vertices(gamma, n)


def ansatz_two(gamma: float) -> np.ndarray:
    """The level-two member ``(1, 0, 0, gamma) / (gamma + 1)``."""
    return np.array([1.0, 0.0, 0.0, gamma]) / (gamma + 1.0)
