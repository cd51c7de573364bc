"""Sampled convexity / monotonicity certificates and chord line minimization.

A certificate that passes means "no violation was found at the recorded
resolution and tolerance"; it is evidence, not a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import NotSmooth, RestrictionNotConvex
from .funcexpr import AffineFunc, FunctionExpr, Polynomial, contains_max, expand, gradient, \
    partial_derivative
from .geometry import CHORD_TOL, Box, Chord, ConvexBody, chord, lattice_points, sample_points

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2
PHI = (1 + math.sqrt(5)) / 2


@dataclass
class ConvexityCertificate:
    kind: str
    verdict: str
    samples_used: int
    tolerance: float
    witness: Optional[Tuple] = None
    max_violation: float = 0.0
    resolution: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "verdict": self.verdict,
            "samples": self.samples_used,
            "tol": self.tolerance,
            "max_violation": self.max_violation,
            "resolution": self.resolution,
        }
        if self.witness is not None:
            out["witness"] = [_jsonable(w) for w in self.witness]
        return out


def _jsonable(w):
    if w is None:
        return None
    if isinstance(w, np.ndarray):
        return [float(v) for v in w]
    if isinstance(w, (tuple, list)):
        return [float(v) for v in w]
    return float(w)


def _certificate(kind, violations, witnesses, tol, resolution):
    """Build a certificate from a violation array; the witness is the first
    violating sample in generation order."""
    n = int(violations.size)
    worst = float(violations.max()) if n else 0.0
    bad = np.nonzero(violations > tol)[0]
    if bad.size:
        i = int(bad[0])
        return ConvexityCertificate(kind, "fail", n, tol, witnesses(i) + (float(violations[i]),),
                                    max(worst, 0.0), resolution)
    return ConvexityCertificate(kind, "pass", n, tol, None, max(worst, 0.0), resolution)


def midpoint_convexity_test(f: FunctionExpr, K: ConvexBody, n_pairs: int = 500, tol: float = 1e-9,
                            seed: int = 0, per_axis: int = 3) -> ConvexityCertificate:
    """Check ``(f(x1)+f(x2))/2 >= f((x1+x2)/2) - tol`` on lattice and random pairs."""
    lat = lattice_points(_bbox(K), per_axis)
    lat = lat[K.contains_batch(lat)]
    ii, jj = np.triu_indices(lat.shape[0], k=1)
    P1, P2 = [lat[ii]], [lat[jj]]
    if n_pairs > 0:
        rng = np.random.default_rng(seed)
        pts = sample_points(K, 2 * n_pairs, rng)
        half = pts.shape[0] // 2
        P1.append(pts[:half])
        P2.append(pts[half:2 * half])
    X1, X2 = np.vstack(P1), np.vstack(P2)
    M = 0.5 * (X1 + X2)
    viol = f.evaluate(M) - 0.5 * (f.evaluate(X1) + f.evaluate(X2))
    return _certificate("midpoint_convexity", viol, lambda i: (X1[i], X2[i]), tol,
                        {"lattice_per_axis": per_axis, "random_pairs": n_pairs, "seed": seed})


def _bbox(K: ConvexBody) -> Box:
    lo, hi = K.bounds()
    return Box(tuple(lo), tuple(hi))


def hessian_psd_test(f: FunctionExpr, region: Box, per_axis: int = 9, tol: float = 1e-9) -> ConvexityCertificate:
    """Minimum Hessian eigenvalue ``>= -tol`` at every lattice point of ``region``."""
    if contains_max(f):
        raise NotSmooth("Hessian test needs a Max-free expression")
    pts = lattice_points(region, per_axis)
    d = f.dim
    grad = [expand(g) for g in gradient(expand(f))]
    H = np.empty((pts.shape[0], d, d))
    for i in range(d):
        for j in range(i, d):
            v = partial_derivative(grad[i], j).evaluate(pts)
            H[:, i, j] = v
            H[:, j, i] = v
    lam = np.linalg.eigvalsh(H)[:, 0]
    return _certificate("hessian_psd", -lam, lambda i: (pts[i], None), tol,
                        {"lattice_per_axis": per_axis})


def monotone_nondecreasing_test(f: FunctionExpr, region: Box, per_axis: int = 9,
                                tol: float = 1e-9) -> ConvexityCertificate:
    """Every partial derivative ``>= -tol`` at every lattice point of ``region``."""
    if contains_max(f):
        raise NotSmooth("monotonicity test needs a Max-free expression")
    pts = lattice_points(region, per_axis)
    G = np.column_stack([g.evaluate(pts) for g in gradient(expand(f))])
    worst = -G.min(axis=1)
    return _certificate("monotone_nondecreasing", worst, lambda i: (pts[i], None), tol,
                        {"lattice_per_axis": per_axis})


def convexity_1d_test(values_at, t_lo: float, t_hi: float, n: int = 33, n_pairs: int = 32,
                      rel_tol: float = 1e-9, seed: int = 0) -> ConvexityCertificate:
    """Midpoint test for a scalar function of one variable on ``[t_lo, t_hi]``.

    ``values_at`` maps an array of parameters to an array of values.
    """
    ts = np.linspace(t_lo, t_hi, n)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n, size=n_pairs)
    t1, t2 = ts[i], ts[j]
    v = values_at(np.concatenate([t1, t2, 0.5 * (t1 + t2)]))
    v1, v2, vm = v[:n_pairs], v[n_pairs:2 * n_pairs], v[2 * n_pairs:]
    scale = 1.0 + np.max(np.abs(v))
    tol = rel_tol * scale
    viol = vm - 0.5 * (v1 + v2)
    return _certificate("midpoint_convexity_1d", viol, lambda k: (t1[k], t2[k]), tol,
                        {"chord_points": n, "pairs": n_pairs})


@dataclass
class LineMinimum:
    y: Tuple[float, ...]
    m: float
    value: float
    tolerance: float
    chord: Chord

    @property
    def point(self) -> np.ndarray:
        return self.m * np.array(self.y)

    def to_json(self) -> dict:
        return {"y": list(self.y), "m": self.m, "value": self.value, "tol": self.tolerance,
                "chord": self.chord.to_json()}


def golden_section(phi, a: float, b: float, tol: float) -> float:
    """Golden-section search with a fixed iteration count.

    Ties go left, so flat bottoms resolve to their left-most point.
    """
    h = b - a
    if h <= tol:
        return a
    n = int(math.ceil(math.log(h / tol) / math.log(PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = phi(c), phi(d)
    for _ in range(n):
        if yc <= yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            yc = phi(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = phi(d)
    return c if yc <= yd else d


def _polynomial_restriction(f: FunctionExpr, yv: np.ndarray):
    """Coefficients (constant first) of ``t -> f(t*y)`` when ``f`` collapses to a polynomial."""
    if contains_max(f):
        return None
    leaf = expand(f)
    if isinstance(leaf, AffineFunc):
        leaf = leaf.to_polynomial()
    if not isinstance(leaf, Polynomial):
        return None
    if not leaf.terms:
        return np.zeros(1)
    # f(t y) = sum_a c_a y^a t^|a|
    A = np.array(list(leaf.terms.keys()), dtype=int)
    c = np.array(list(leaf.terms.values()))
    mono = c * np.prod(yv[None, :] ** A, axis=1)
    return np.bincount(A.sum(axis=1), weights=mono)


def line_minimize(f: FunctionExpr, K: ConvexBody, y, tol: float = CHORD_TOL, check: bool = True,
                  ch: Optional[Chord] = None) -> LineMinimum:
    """Minimize ``t -> f(t*y)`` over the chord of ``K`` along ``y``.

    Polynomial inputs are restricted to the chord symbolically first, so the
    search evaluates a univariate polynomial.
    """
    ch = ch if ch is not None else chord(K, y)
    yv = np.array(ch.y)
    coeffs = _polynomial_restriction(f, yv)

    if coeffs is None:
        def phi_many(ts):
            return f.evaluate(np.outer(np.atleast_1d(ts), yv))

        def phi(t):
            return float(phi_many(t)[0])
    else:
        rev = [float(c) for c in coeffs[::-1]]

        def phi_many(ts):
            return np.polynomial.polynomial.polyval(np.atleast_1d(np.asarray(ts, dtype=float)), coeffs)

        def phi(t):
            v = 0.0
            for c in rev:
                v = v * t + c
            return v

    if check:
        cert = convexity_1d_test(phi_many, ch.t_min, ch.t_max)
        if not cert.passed:
            raise RestrictionNotConvex(f"restriction along {ch.y} is not convex: witness {cert.witness}")
    m = golden_section(phi, ch.t_min, ch.t_max, tol)
    cands = [(ch.t_min, phi(ch.t_min)), (m, phi(m)), (ch.t_max, phi(ch.t_max))]
    best_t, best_v = cands[0]
    for t, v in cands[1:]:
        if v < best_v:
            best_t, best_v = t, v
    return LineMinimum(ch.y, float(best_t), float(best_v), tol, ch)
