"""Numerical kernels shared by every information quantity.

The conventions ``0 log 0 = 0`` and ``p log(p/0) = +inf`` for ``p > 0`` live
here and nowhere else. Kernels work in nats; callers convert units.
"""
from __future__ import annotations

import math

import numpy as np

# Smallest value a mixture entry is clamped to inside iterative solvers.
CLAMP = 1e-300


def support_violation(p: np.ndarray, q: np.ndarray) -> bool:
    """True when ``p`` puts mass where ``q`` has none."""
    return bool(np.any((p > 0) & (q <= 0)))


def relative_entropy_nats(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if support_violation(p, q):
        return math.inf
    mask = p > 0
    val = float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))
    # Rounding can push a true zero slightly negative.
    return max(val, 0.0) if abs(val) < 1e-15 else val


def entropy_nats(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log(p[mask])))


def binary_entropy_nats(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def binary_relative_entropy_nats(p: float, q: float) -> float:
    return relative_entropy_nats(np.array([p, 1.0 - p]), np.array([q, 1.0 - q]))
