"""Dense primal simplex for small LPs: max c'x s.t. Ax <= b, x >= 0, b >= 0.

Bland's smallest-index rule throughout, so cycling is impossible. The basis
inverse is kept explicitly, updated by elementary row operations, and
refreshed periodically to bound drift.
"""
from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
MAX_ITERATIONS = 10**6
REFRESH_EVERY = 512


class SimplexError(RuntimeError):
    pass


class Unbounded(SimplexError):
    pass


def solve_canonical(A: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Returns (x, objective, iterations) at an optimal basic solution.

    The slack basis is feasible because every right-hand side here is
    nonnegative (all benchmark LPs admit f = 0).
    """
    m, n = A.shape
    if np.any(b < -PIVOT_TOL):
        raise SimplexError("rhs must be nonnegative (slack basis infeasible)")
    T = np.hstack([A, np.eye(m)])
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m)
    B_inv = np.eye(m)
    xb = np.clip(b.astype(float), 0.0, None)

    it = 0
    while True:
        it += 1
        if it > MAX_ITERATIONS:
            raise SimplexError("iteration cap exceeded")
        if it % REFRESH_EVERY == 0:
            B_inv = np.linalg.inv(T[:, basis])
            xb = np.clip(B_inv @ b, 0.0, None)
        y = cost[basis] @ B_inv
        reduced = cost - y @ T
        in_basis = np.zeros(n + m, dtype=bool)
        in_basis[basis] = True
        candidates = np.flatnonzero(~in_basis & (reduced > REDUCED_COST_TOL))
        if len(candidates) == 0:
            x = np.zeros(n + m)
            x[basis] = xb
            return x[:n], float(cost[basis] @ xb), it
        j = int(candidates[0])  # Bland: smallest index enters
        d = B_inv @ T[:, j]
        pos = d > PIVOT_TOL
        if not pos.any():
            raise Unbounded("LP is unbounded")
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(pos, xb / d, np.inf)
        theta_min = ratios[pos].min()
        ties = np.flatnonzero(pos & (ratios <= theta_min + PIVOT_TOL))
        r = int(ties[np.argmin(basis[ties])])  # Bland: smallest basis var leaves
        piv = d[r]
        theta = xb[r] / piv
        xb = xb - d * theta
        xb[r] = theta
        xb[xb < -PIVOT_TOL] = 0.0
        pivot_row = B_inv[r] / piv
        B_inv = B_inv - np.outer(d, pivot_row)
        B_inv[r] = pivot_row
        basis[r] = j
