"""Dense two-phase primal simplex for small bounded-variable programs.

Solves ``min c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``0 <= x <= upper``. Pivoting follows Bland's rule (lowest eligible index
enters, lowest index leaves among ratio ties), which rules out cycling and
makes the returned vertex a deterministic function of the input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, SteinLabError

MAX_VARIABLES = 20_000
MAX_ROWS = 20_000
# Dense tableau entries; beyond this the pivoting cost makes runs impractically slow.
MAX_TABLEAU = 1_500_000


class InfeasibleError(SteinLabError):
    pass


class UnboundedError(SteinLabError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


class _Tableau:
    REINVERT_EVERY = 50
    PIVOT_TOL = 1e-9

    def __init__(self, A, b, upper, tol):
        m, nv = A.shape
        self.tol = tol
        self.Ab = np.hstack([A, b[:, None]]).astype(float)
        self.T = self.Ab.copy()
        self.upper = upper.astype(float)
        self.at_upper = np.zeros(nv, dtype=bool)
        self.basis = np.full(m, -1, dtype=np.int64)
        self.is_basic = np.zeros(nv, dtype=bool)
        self.iterations = 0

    def basic_values(self):
        rhs = self.T[:, -1].copy()
        up = np.flatnonzero(self.at_upper)
        if up.size:
            rhs -= self.T[:, up] @ self.upper[up]
        return rhs

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        self.z -= self.z[j] * T[r, :-1]
        old = self.basis[r]
        if old >= 0:
            self.is_basic[old] = False
        self.basis[r] = j
        self.is_basic[j] = True
        self.at_upper[j] = False

    def set_costs(self, c):
        self.c = c
        self.reinvert()

    def reinvert(self):
        """Rebuild the tableau from the original rows to flush rounding error."""
        B = self.Ab[:, self.basis]
        self.T = np.linalg.solve(B, self.Ab)
        self.T[np.arange(self.T.shape[0]), self.basis] = 1.0
        self.z = self.c - self.c[self.basis] @ self.T[:, :-1]

    def run(self, max_iter):
        tol = self.tol
        while True:
            if self.iterations >= max_iter:
                raise CapacityError("simplex iteration limit reached")
            if self.iterations % self.REINVERT_EVERY == 0:
                self.reinvert()
            z = self.z
            free = ~self.is_basic & (self.upper > tol)
            eligible = free & ((~self.at_upper & (z < -tol)) | (self.at_upper & (z > tol)))
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                return
            j = int(cand[0])
            sigma = -1.0 if self.at_upper[j] else 1.0
            beta = self.basic_values()
            rate = -sigma * self.T[:, j]
            ub = self.upper[self.basis]
            theta = np.full(rate.size, np.inf)
            ptol = self.PIVOT_TOL
            dec = rate < -ptol
            theta[dec] = np.maximum(beta[dec], 0.0) / -rate[dec]
            inc = (rate > ptol) & np.isfinite(ub)
            theta[inc] = np.maximum(ub[inc] - beta[inc], 0.0) / rate[inc]
            best = theta.min() if theta.size else np.inf
            flip = self.upper[j]
            self.iterations += 1
            if flip <= best:
                if not np.isfinite(flip):
                    raise UnboundedError("objective is unbounded below")
                self.at_upper[j] = not self.at_upper[j]
                continue
            ties = np.flatnonzero(theta <= best + 1e-12 * max(1.0, best))
            r = int(ties[np.argmin(self.basis[ties])])
            leaving = self.basis[r]
            to_upper = rate[r] > 0
            self.pivot(r, j)
            if to_upper:
                self.at_upper[leaving] = True


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, upper=None, *,
            tol: float = 1e-10, max_iter: int = 200_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    nx = c.size
    A_ub = np.zeros((0, nx)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, nx)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    upper = np.full(nx, np.inf) if upper is None else np.asarray(upper, dtype=float).reshape(-1)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if nx > MAX_VARIABLES or m > MAX_ROWS:
        raise CapacityError(f"LP with {nx} variables and {m} rows exceeds the cap")
    if m * (nx + m_ub + m) > MAX_TABLEAU:
        raise CapacityError(f"LP tableau {m} x {nx + m_ub + m} exceeds {MAX_TABLEAU} entries")

    # Columns: structural x, one slack per inequality, one artificial per row.
    A = np.zeros((m, nx + m_ub + m))
    A[:m_ub, :nx] = A_ub
    A[:m_ub, nx:nx + m_ub] = np.eye(m_ub)
    A[m_ub:, :nx] = A_eq
    b = np.concatenate([b_ub, b_eq])
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    art0 = nx + m_ub
    A[:, art0:] = np.eye(m)
    ub_all = np.concatenate([upper, np.full(m_ub, np.inf), np.full(m, np.inf)])

    tab = _Tableau(A, b, ub_all, tol)
    tab.basis[:] = art0 + np.arange(m)
    # Unflipped inequality rows can start from their slack.
    for i in range(m_ub):
        if not flip[i]:
            tab.basis[i] = nx + i
    tab.is_basic[tab.basis] = True
    unused = np.setdiff1d(art0 + np.arange(m), tab.basis)
    tab.upper[unused] = 0.0

    phase1 = np.zeros(A.shape[1])
    phase1[art0:] = 1.0
    tab.set_costs(phase1)
    tab.run(max_iter)
    infeas = float(phase1[tab.basis] @ tab.basic_values())
    if infeas > 1e-8 * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise InfeasibleError(f"constraints are infeasible (phase one residual {infeas:.3g})")
    tab.upper[art0:] = 0.0
    cost = np.zeros(A.shape[1])
    cost[:nx] = c
    tab.set_costs(cost)
    tab.run(max_iter)

    x = np.zeros(A.shape[1])
    up = np.flatnonzero(tab.at_upper)
    x[up] = tab.upper[up]
    x[tab.basis] = tab.basic_values()
    xs = np.clip(x[:nx], 0.0, upper)
    return LPResult(xs, float(c @ xs), tab.iterations)
