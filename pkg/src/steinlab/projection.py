"""Relative-entropy projections onto convex hulls of finitely many points.

All routines work in nats and return a Frank-Wolfe duality gap, which
upper-bounds the distance of the returned value from the true minimum. Away
steps are used alongside ordinary Frank-Wolfe steps; they let the iterate
drop vertices and give fast convergence when the minimiser sits on a face.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import CLAMP

TOL = 1e-8
MAX_ITER = 10_000


@dataclass
class BatchProjection:
    value: np.ndarray       # nats, +inf where the hull misses supp(P)
    weights: np.ndarray     # mixture weights over generators, one row per input
    mixture: np.ndarray     # the minimising point of the hull
    gap: np.ndarray         # Frank-Wolfe duality gap in nats
    iterations: np.ndarray

    @property
    def infinite(self) -> np.ndarray:
        return ~np.isfinite(self.value)


def _kl_rows(P, Q):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, P * (np.log(np.where(P > 0, P, 1.0)) - np.log(Q)), 0.0)
    return t.sum(axis=1)


def _segment_search(P, Q, d, gmax, iters=80):
    """Minimise ``KL(P || Q + g d)`` over ``g`` in ``[0, gmax]`` row-wise.

    The objective is convex in ``g``; its derivative is bracketed and refined
    by Newton steps that fall back to bisection.
    """
    def deriv(g):
        den = Q + g[:, None] * d
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(P > 0, P / np.maximum(den, 0.0), 0.0)
            first = -(r * d).sum(axis=1)
            second = (r * r / np.where(P > 0, P, 1.0) * d * d).sum(axis=1)
        first = np.where(np.isnan(first), np.inf, first)
        return first, second

    lo = np.zeros_like(gmax)
    hi = gmax.copy()
    f_hi, _ = deriv(hi)
    done = f_hi <= 0
    g = np.where(done, hi, 0.5 * hi)
    for _ in range(iters):
        if done.all():
            break
        f, s = deriv(g)
        pos = f > 0
        hi = np.where(~done & pos, g, hi)
        lo = np.where(~done & ~pos, g, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = g - f / s
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi)
        nxt = np.where(ok, newton, 0.5 * (lo + hi))
        conv = np.abs(nxt - g) <= 1e-15 * np.maximum(1.0, gmax)
        g = np.where(done, g, nxt)
        done = done | conv | (hi - lo <= 1e-16 * np.maximum(1.0, gmax))
    return g


def kl_projection(P, G, *, tol: float = TOL, max_iter: int = MAX_ITER) -> BatchProjection:
    """Minimise ``KL(P_b || lambda @ G)`` over mixture weights, for each row ``P_b``.

    ``P`` has shape ``(B, N)`` (or ``(N,)``) and ``G`` shape ``(k, N)``. The
    search starts from the uniform mixture of the generators.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    G = np.atleast_2d(np.asarray(G, dtype=float))
    B, N = P.shape
    k = G.shape[0]
    infinite = np.any((P > 0) & (G.sum(axis=0) <= 0)[None, :], axis=1)
    lam = np.full((B, k), 1.0 / k)
    Q = np.maximum(lam @ G, CLAMP)
    gap = np.zeros(B)
    iters = np.zeros(B, dtype=np.int64)
    active = ~infinite
    rows = np.arange(B)
    for it in range(max_iter):
        if not active.any():
            break
        idx = rows[active]
        Pa, Qa, La = P[idx], Q[idx], lam[idx]
        r = Pa / Qa
        s = r @ G.T                       # <P/Q, G_i>, the negated gradient scores
        sq = (r * Qa).sum(axis=1)
        fw = np.argmax(s, axis=1)
        g_fw = s[np.arange(idx.size), fw] - sq
        masked = np.where(La > 0, s, np.inf)
        aw = np.argmin(masked, axis=1)
        g_aw = sq - masked[np.arange(idx.size), aw]
        gap[idx] = g_fw
        conv = g_fw <= tol
        iters[idx] = it
        still = ~conv
        if not still.any():
            active[idx] = False
            break
        active[idx[conv]] = False
        idx, Pa, Qa, La = idx[still], Pa[still], Qa[still], La[still]
        fw, aw, g_fw, g_aw = fw[still], aw[still], g_fw[still], g_aw[still]
        use_fw = g_fw >= g_aw
        la = La[np.arange(idx.size), aw]
        d = np.where(use_fw[:, None], G[fw] - Qa, Qa - G[aw])
        with np.errstate(divide="ignore"):
            gmax = np.where(use_fw, 1.0, la / np.maximum(1.0 - la, 0.0))
        gmax = np.where(np.isfinite(gmax), gmax, 1.0)
        gam = _segment_search(Pa, Qa, d, gmax)
        newL = np.where(use_fw[:, None], (1.0 - gam)[:, None] * La, (1.0 + gam)[:, None] * La)
        j = np.arange(idx.size)
        newL[j[use_fw], fw[use_fw]] += gam[use_fw]
        newL[j[~use_fw], aw[~use_fw]] -= gam[~use_fw]
        drop = ~use_fw & (gam >= gmax)
        newL[j[drop], aw[drop]] = 0.0
        newL = np.maximum(newL, 0.0)
        newL /= newL.sum(axis=1, keepdims=True)
        lam[idx] = newL
        Q[idx] = np.maximum(newL @ G, CLAMP)
    value = np.full(B, np.inf)
    fin = ~infinite
    value[fin] = np.maximum(_kl_rows(P[fin], Q[fin]), 0.0)
    if fin.any():
        r = P[fin] / Q[fin]
        s = r @ G.T
        gap[fin] = np.maximum(s.max(axis=1) - (r * Q[fin]).sum(axis=1), 0.0)
    gap[infinite] = 0.0
    mix = lam @ G
    return BatchProjection(value, lam, mix, gap, iters)


@dataclass
class PairProjection:
    value: float
    left: np.ndarray
    right: np.ndarray
    left_weights: np.ndarray
    right_weights: np.ndarray
    gap: float
    iterations: int

    @property
    def lower(self) -> float:
        return self.value - self.gap


def _pair_deriv(P, Q, a, b, g):
    p = np.maximum(P + g * a, 0.0)
    q = np.maximum(Q + g * b, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(np.maximum(p, CLAMP)) - np.log(np.maximum(q, CLAMP))
        term = a * lr - np.where(p > 0, p * b / q, 0.0)
    term = np.where(np.isnan(term), np.inf, term)
    return float(term.sum())


def kl_between_hulls(GR, GS, *, tol: float = TOL, max_iter: int = MAX_ITER) -> PairProjection:
    """Minimise ``KL(P || Q)`` jointly over ``P`` in co(GR) and ``Q`` in co(GS)."""
    GR = np.atleast_2d(np.asarray(GR, dtype=float))
    GS = np.atleast_2d(np.asarray(GS, dtype=float))
    supp_s = GS.sum(axis=0) > 0
    usable = ~np.any((GR > 0) & ~supp_s[None, :], axis=1)
    if not usable.any():
        return PairProjection(np.inf, GR[0], GS[0], np.eye(len(GR))[0],
                              np.full(len(GS), 1.0 / len(GS)), 0.0, 0)
    mu = np.where(usable, 1.0, 0.0)
    mu /= mu.sum()
    lam = np.full(GS.shape[0], 1.0 / GS.shape[0])
    it = 0
    gap = np.inf
    for it in range(max_iter):
        P = mu @ GR
        Q = np.maximum(lam @ GS, CLAMP)
        gradP = np.log(np.maximum(P, CLAMP)) - np.log(Q)
        gradQ = -P / Q
        sR = np.where(usable, GR @ gradP, np.inf)
        sS = GS @ gradQ
        cP, cQ = gradP @ P, gradQ @ Q
        i_fw, j_fw = int(np.argmin(sR)), int(np.argmin(sS))
        gap = (cP - sR[i_fw]) + (cQ - sS[j_fw])
        if gap <= tol:
            break
        i_aw = int(np.argmax(np.where(mu > 0, sR, -np.inf)))
        j_aw = int(np.argmax(np.where(lam > 0, sS, -np.inf)))
        g_aw = (sR[i_aw] - cP) + (sS[j_aw] - cQ)
        if gap >= g_aw:
            a, b, gmax, away = GR[i_fw] - P, GS[j_fw] - Q, 1.0, False
        else:
            a, b = P - GR[i_aw], Q - GS[j_aw]
            lim = [m / (1 - m) if m < 1 else np.inf for m in (mu[i_aw], lam[j_aw])]
            gmax, away = min(lim), True
            if not np.isfinite(gmax):
                a, b, gmax, away = GR[i_fw] - P, GS[j_fw] - Q, 1.0, False
        if _pair_deriv(P, Q, a, b, gmax) <= 0:
            g = gmax
        else:
            lo, hi = 0.0, gmax
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if _pair_deriv(P, Q, a, b, mid) > 0:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-17 * max(1.0, gmax):
                    break
            g = 0.5 * (lo + hi)
        if away:
            mu, lam = (1 + g) * mu, (1 + g) * lam
            mu[i_aw] -= g
            lam[j_aw] -= g
            if g >= gmax:
                if mu[i_aw] < 1e-15:
                    mu[i_aw] = 0.0
                if lam[j_aw] < 1e-15:
                    lam[j_aw] = 0.0
        else:
            mu, lam = (1 - g) * mu, (1 - g) * lam
            mu[i_fw] += g
            lam[j_fw] += g
        mu = np.maximum(mu, 0.0)
        lam = np.maximum(lam, 0.0)
        mu /= mu.sum()
        lam /= lam.sum()
    P = mu @ GR
    Q = np.maximum(lam @ GS, CLAMP)
    value = float(_kl_rows(P[None], Q[None])[0])
    return PairProjection(max(value, 0.0), P, lam @ GS, mu, lam, float(max(gap, 0.0)), it)


def kl_from_tv_ball(P, Bq, delta: float, *, tol: float = 1e-9, max_iter: int = 5_000):
    """Minimise ``KL(P' || Bq)`` over distributions ``P'`` with ``TV(P', P) <= delta``.

    Returns ``(value, gap)`` in nats. The linear oracle over the ball moves up
    to ``delta`` mass from the largest-gradient coordinates onto the smallest.
    """
    P = np.asarray(P, dtype=float)
    Bq = np.asarray(Bq, dtype=float)
    outside = Bq <= 0
    if P[outside].sum() > delta + 1e-15:
        return np.inf, 0.0
    start = P.copy()
    moved = start[outside].sum()
    start[outside] = 0.0
    start[int(np.argmax(Bq))] += moved

    def lmo(grad):
        v = P.copy()
        low = int(np.argmin(grad))
        budget = delta
        for i in np.argsort(-grad, kind="stable"):
            if i == low or budget <= 0:
                continue
            take = min(v[i], budget)
            v[i] -= take
            v[low] += take
            budget -= take
        return v

    x = start
    gap = np.inf
    for _ in range(max_iter):
        grad = np.where(outside, 1e300, np.log(np.maximum(x, CLAMP)) - np.log(np.maximum(Bq, CLAMP)))
        v = lmo(grad)
        d = v - x
        gap = float(-(grad * d).sum()) if np.all(d[outside] == 0) else np.inf
        if gap <= tol:
            break
        lo, hi = 0.0, 1.0

        def dd(g):
            y = np.maximum(x + g * d, CLAMP)
            m = ~outside
            return float((d[m] * (np.log(y[m]) - np.log(Bq[m]))).sum())

        if dd(1.0) <= 0:
            g = 1.0
        else:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if dd(mid) > 0:
                    hi = mid
                else:
                    lo = mid
            g = 0.5 * (lo + hi)
        x = x + g * d
    m = x > 0
    val = float((x[m] * (np.log(x[m]) - np.log(Bq[m]))).sum())
    return max(val, 0.0), max(gap, 0.0)
