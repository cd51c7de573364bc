"""Dense-tableau two-phase simplex with Bland's anti-cycling rule.

Solves::

    maximize    c . x
    subject to  A_ub x <= b_ub
                A_eq x == b_eq
                x >= 0

Free variables are the caller's business (split them as x = x+ - x-).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, NumericallyDegenerate, Unbounded

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    piv = T[r, c]
    if abs(piv) < PIVOT_TOL:
        raise NumericallyDegenerate(f"pivot {piv:.3e} below tolerance")
    T[r] /= piv
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: list, allowed: int, max_iter: int) -> int:
    """Maximize the objective held in the last row of ``T`` (stored as -c).

    Only the first ``allowed`` columns may enter the basis.
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        obj = T[-1, :allowed]
        scale = max(1.0, float(np.max(np.abs(obj))))
        cand = np.nonzero(obj < -PIVOT_TOL * scale)[0]
        if cand.size == 0:
            return it
        c = int(cand[0])  # Bland: lowest index
        col = T[:m, c]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise Unbounded("objective unbounded along an entering column")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))[0]
        r = min(ties, key=lambda i: basis[i])  # Bland: lowest basic index leaves
        _pivot(T, r, c)
        basis[r] = c
        it += 1
        if it > max_iter:
            raise NumericallyDegenerate("simplex iteration limit reached")


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 50000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    # rows: [A | slack | artificial | rhs]; every rhs made nonnegative
    A = np.vstack([A_ub, A_eq])
    b = np.concatenate([b_ub, b_eq])
    S = np.vstack([np.eye(mu), np.zeros((me, mu))])
    neg = b < 0
    A[neg] *= -1
    S[neg] *= -1
    b[neg] *= -1

    need_art = [i for i in range(m) if i >= mu or neg[i]]
    na = len(need_art)
    Art = np.zeros((m, na))
    for k, i in enumerate(need_art):
        Art[i, k] = 1.0

    ncols = n + mu + na
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A
    T[:m, n:n + mu] = S
    T[:m, n + mu:ncols] = Art
    T[:m, -1] = b
    basis = []
    art_of_row = {i: n + mu + k for k, i in enumerate(need_art)}
    for i in range(m):
        basis.append(art_of_row[i] if i in art_of_row else n + i)

    iters = 0
    if na:
        # phase 1: maximize -(sum of artificials)
        T[-1, n + mu:ncols] = 1.0
        for i in need_art:
            T[-1] -= T[i]
        iters += _run(T, basis, ncols, max_iter)
        if T[-1, -1] < -FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            raise Infeasible(f"phase-1 optimum {-T[-1, -1]:.3e} > 0")
        # drive remaining artificials out of the basis
        for r in range(m):
            if basis[r] >= n + mu:
                row = T[r, :n + mu]
                nz = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
        keep = [r for r in range(m) if basis[r] < n + mu]
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[r] for r in keep]
        T = np.hstack([T[:, :n + mu], T[:, -1:]])

    # phase 2 objective row: -c, then eliminate basic columns
    T[-1] = 0.0
    T[-1, :n] = -c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    iters += _run(T, basis, n + mu, max_iter)

    x = np.zeros(n + mu)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    x = x[:n]
    return LPResult(x=x, value=float(c @ x), iterations=iters)
