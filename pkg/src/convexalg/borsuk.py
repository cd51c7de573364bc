"""Search for a direction along which ``d`` convex functions share a chord minimizer.

For ``d = 2`` the gap ``theta -> m(f1, y(theta)) - m(f2, y(theta))`` is odd
under ``theta -> theta + pi``, so it changes sign on ``[0, pi]`` and a
bisection finds its zero.  For ``d >= 3`` the antipodal theorem guarantees a
zero but gives no algorithm; we search a sphere lattice and polish with
Nelder-Mead.  Both run on the regularized functions
``f + |x - z|^2 / n`` for ``n = 1, 2, 4, ...`` so that minimizers are unique.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .convexity import line_minimize
from .errors import NoSignChangeFound, NotConverged
from .funcexpr import FunctionExpr, Sum, scale, sq_distance
from .geometry import CHORD_TOL, ConvexBody, chord


@dataclass
class CommonDirection:
    y: tuple
    m: float
    residual: float
    n: int
    tolerance: float
    converged: bool = True
    minimizers: List[float] = field(default_factory=list)
    trace: List[dict] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.residual <= self.tolerance

    def to_json(self) -> dict:
        return {
            "y": list(self.y),
            "m": self.m,
            "residual": self.residual,
            "regularization_level": self.n,
            "tol": self.tolerance,
            "converged": self.converged,
            "minimizers": self.minimizers,
            "trace": self.trace,
        }


def regularized(f: FunctionExpr, z: Optional[Sequence[float]], n: int) -> FunctionExpr:
    """``f + |x - z|^2 / n``."""
    if n < 1:
        raise ValueError("regularization level must be >= 1")
    z = [0.0] * f.dim if z is None else list(z)
    return Sum((f, scale(1.0 / n, sq_distance(z))))


def minimizers(f_list, K: ConvexBody, y, tol: float = CHORD_TOL, check: bool = False) -> np.ndarray:
    ch = chord(K, y)
    return np.array([line_minimize(f, K, y, tol, check=check, ch=ch).m for f in f_list])


def gap_map(f_list, K: ConvexBody, y, tol: float = CHORD_TOL, check: bool = True) -> np.ndarray:
    """``(m(f_1, y) - m(f_d, y), ..., m(f_{d-1}, y) - m(f_d, y))``."""
    ms = minimizers(f_list, K, y, tol, check)
    return ms[:-1] - ms[-1]


def _unregularized(f_list, K, y, line_tol):
    ms = minimizers(f_list, K, y, line_tol, check=True)
    m = 0.5 * (float(ms.min()) + float(ms.max()))
    return m, float(np.max(np.abs(ms - m))), ms


def _direction(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def find_common_direction_2d(f1: FunctionExpr, f2: FunctionExpr, K: ConvexBody, tol: float = 1e-7,
                             z=None, n_cap: int = 1024, n_scan: int = 64,
                             line_tol: float = CHORD_TOL) -> CommonDirection:
    if K.dim != 2:
        raise ValueError("find_common_direction_2d needs a planar body")
    trace = []
    prev = None
    n = 1
    while n <= n_cap:
        fs = (regularized(f1, z, n), regularized(f2, z, n))

        def s(theta):
            ms = minimizers(fs, K, _direction(theta), line_tol)
            return float(ms[0] - ms[1])

        thetas = np.linspace(0.0, math.pi, n_scan + 1)
        vals = [s(t) for t in thetas]
        theta = None
        for t, v in zip(thetas, vals):
            if abs(v) <= tol:
                theta = float(t)
                break
        if theta is None:
            for k in range(n_scan):
                if vals[k] * vals[k + 1] < 0:
                    lo, hi, slo = thetas[k], thetas[k + 1], vals[k]
                    while hi - lo > 1e-12:
                        mid = 0.5 * (lo + hi)
                        smid = s(mid)
                        if smid == 0.0:
                            lo = hi = mid
                            break
                        if (smid < 0) == (slo < 0):
                            lo, slo = mid, smid
                        else:
                            hi = mid
                    theta = 0.5 * (lo + hi)
                    break
        if theta is None:
            raise NoSignChangeFound(f"gap map has no sign change on [0, pi] at level n={n}")
        y = _direction(theta)
        m_reg = float(np.mean(minimizers(fs, K, y, line_tol)))
        m, residual, ms = _unregularized((f1, f2), K, y, line_tol)
        trace.append({"n": n, "theta": theta, "y": [float(v) for v in y], "m": m, "m_regularized": m_reg,
                      "residual": residual})
        if prev is not None and np.linalg.norm(y - prev[0]) <= tol and abs(m - prev[1]) <= tol:
            return CommonDirection(tuple(float(v) for v in y), m, residual, n, tol, True,
                                   [float(v) for v in ms], trace)
        prev = (y, m)
        n *= 2
    result = CommonDirection(tuple(float(v) for v in prev[0]), prev[1], trace[-1]["residual"], n // 2, tol,
                             False, [], trace)
    raise NotConverged(f"direction did not stabilize by n={n_cap}", result)


# ---------------------------------------------------------------------------
# d >= 3


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform points on S^2."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = math.pi * (1 + 5 ** 0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def sphere_points(d: int, n: int, seed: int) -> np.ndarray:
    if d == 3:
        return fibonacci_sphere(n)
    g = np.random.default_rng(seed).standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _tangent_basis(y: np.ndarray) -> np.ndarray:
    # columns span the orthogonal complement of y
    q, _ = np.linalg.qr(np.column_stack([y, np.eye(y.size)]))
    return q[:, 1:y.size]


def _polish(fs, K, y0, line_tol, maxiter):
    B = _tangent_basis(y0)

    def to_y(v):
        w = y0 + B @ v
        return w / np.linalg.norm(w)

    def obj(v):
        g = gap_map(fs, K, to_y(v), line_tol, check=False)
        return float(g @ g)

    res = minimize(obj, np.zeros(B.shape[1]), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": maxiter,
                            "initial_simplex": np.vstack([np.zeros(B.shape[1]), 0.05 * np.eye(B.shape[1])])})
    return to_y(res.x)


def find_common_direction_heuristic(f_list: Sequence[FunctionExpr], K: ConvexBody, tol: float = 1e-4,
                                    z=None, grid_size: int = 200, seed: int = 0, n_cap: int = 1024,
                                    line_tol: float = CHORD_TOL, maxiter: int = 400) -> CommonDirection:
    """Best-effort common-minimizer direction for ``d >= 3`` functions; ``success`` iff residual <= tol."""
    f_list = list(f_list)
    d = K.dim
    if len(f_list) != d:
        raise ValueError(f"need {d} functions on a {d}-dimensional body")
    trace = []
    best = None
    y = None
    n = 1
    while n <= n_cap:
        fs = [regularized(f, z, n) for f in f_list]
        if y is None:
            pts = sphere_points(d, grid_size, seed)
            scores = []
            for p in pts:
                g = gap_map(fs, K, p, line_tol, check=False)
                scores.append(float(np.max(np.abs(g))))
            order = sorted(range(len(pts)), key=lambda i: (scores[i], tuple(pts[i])))
            y = pts[order[0]]
        y_new = _polish(fs, K, y, line_tol, maxiter)
        reg_res = float(np.max(np.abs(gap_map(fs, K, y_new, line_tol, check=False))))
        # polish once more on the original functions from the regularized answer
        y_raw = _polish(f_list, K, y_new, line_tol, maxiter)
        cands = []
        for cand in (y_new, y_raw):
            m, residual, ms = _unregularized(f_list, K, cand, line_tol)
            cands.append((residual, tuple(cand), m, ms))
        cands.sort(key=lambda c: (c[0], c[1]))
        residual, yc, m, ms = cands[0]
        trace.append({"n": n, "y": list(yc), "m": m, "residual": residual, "regularized_residual": reg_res})
        if best is None or residual < best.residual:
            best = CommonDirection(tuple(float(v) for v in yc), m, residual, n, tol, True,
                                   [float(v) for v in ms], trace)
        if residual <= tol:
            break
        converged = y is not None and np.linalg.norm(y_new - y) <= tol and n > 1
        y = y_new
        if converged:
            break
        n *= 2
    best.trace = trace
    if not best.success:
        best.converged = False
        raise NotConverged(f"best residual {best.residual:.3e} exceeds tol {tol:.1e}", best)
    return best
