"""Convex approximation through the canonical shape-generating set.

Given a convex polynomial ``p`` on ``K`` and convex approximants ``h_k`` of
the generators ``x_1, ..., x_d, -(x_1 + ... + x_d)``, ``assemble`` builds

    p~ = g(h_1, ..., h_d) + lambda_0 + sum_k lambda_k h_k

where ``g = p + l`` is ``p`` plus a linear shift that makes it nondecreasing
in every variable on the 1-fattening of ``K``, and the lambdas are the
nonnegative coordinates of ``-l`` in the generator cone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .convexity import ConvexityCertificate, midpoint_convexity_test, monotone_nondecreasing_test
from .errors import ApproximantsTooCoarse, InputNotConvex, MonotonicityFailed
from .funcexpr import (
    AffineFunc,
    Compose,
    FunctionExpr,
    Polynomial,
    add,
    expand,
    gradient,
    scale,
    sup_norm_on_grid,
)
from .geometry import ConvexBody, Grid, bounding_box, lattice_points

SAFETY = 1.05


@dataclass(frozen=True)
class SGSet:
    generators: tuple

    @property
    def dim(self) -> int:
        return len(self.generators) - 1


def canonical_sg_set(d: int) -> SGSet:
    if d < 1:
        raise ValueError("dimension must be positive")
    gens = [AffineFunc.coordinate(d, j) for j in range(d)]
    gens.append(AffineFunc((-1.0,) * d, 0.0))
    return SGSet(tuple(gens))


@dataclass(frozen=True)
class NonnegRepresentation:
    lambda0: float
    lambdas: tuple

    def reconstruct(self) -> AffineFunc:
        d = len(self.lambdas) - 1
        top = self.lambdas[-1]
        return AffineFunc(tuple(self.lambdas[k] - top for k in range(d)), self.lambda0)

    def to_json(self) -> dict:
        return {"lambda0": self.lambda0, "lambda": list(self.lambdas)}


def nonneg_representation(a: AffineFunc, d: int) -> NonnegRepresentation:
    """Coordinates of ``a`` as ``lambda_0 + sum lambda_k l_k`` with ``lambda_k >= 0``."""
    if a.dim != d:
        raise ValueError(f"affine function has dimension {a.dim}, expected {d}")
    top = max(0.0, max(-c for c in a.coef))
    lambdas = tuple(c + top for c in a.coef) + (top,)
    return NonnegRepresentation(a.offset, lambdas)


def _fattened_lattice(K: ConvexBody, per_axis: int) -> np.ndarray:
    return lattice_points(bounding_box(K, 1.0), per_axis)


def shift_functional(p: Polynomial, K: ConvexBody, per_axis: int = 41) -> AffineFunc:
    """``l(x) = sum_j c_j x_j`` with ``c_j`` an inflated sup of ``|dp/dx_j|`` over ``K*``."""
    pts = _fattened_lattice(K, per_axis)
    coef = []
    for g in gradient(p):
        coef.append(SAFETY * float(np.max(np.abs(g.evaluate(pts)))))
    return AffineFunc(tuple(coef), 0.0)


def continuity_delta(g: Polynomial, K: ConvexBody, eps: float, per_axis: int = 41) -> float:
    """A ``delta in (0, 1)`` with ``|g(x1) - g(x2)| < eps`` whenever ``|x1 - x2| < delta`` on ``K*``.

    Uses the Lipschitz bound ``sup |grad g|`` (inflated); a vanishing gradient
    returns 0.99.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = _fattened_lattice(K, per_axis)
    G = np.column_stack([d.evaluate(pts) for d in gradient(g)])
    lip = float(np.max(np.linalg.norm(G, axis=1)))
    if lip == 0.0:
        return 0.99
    return min(0.99, eps / (SAFETY * lip))


@dataclass
class AssemblyReport:
    shift: AffineFunc
    g: Polynomial
    delta: float
    composed: FunctionExpr
    approximant: FunctionExpr
    representation: NonnegRepresentation
    error_estimate: float
    error_bound: float
    generator_errors: List[float]
    eps: float
    certificates: List[ConvexityCertificate] = field(default_factory=list)
    range_guard_max_distance: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "shift": list(self.shift.coef),
            "g": self.g.to_json(),
            "delta": self.delta,
            "representation": self.representation.to_json(),
            "generator_errors": self.generator_errors,
            "error_estimate": self.error_estimate,
            "error_bound": self.error_bound,
            "range_guard_max_distance": self.range_guard_max_distance,
            "approximant": self.approximant.to_json(),
            "certificates": [c.to_json() for c in self.certificates],
        }


def assemble(p: Polynomial, h: Sequence[FunctionExpr], K: ConvexBody, eps: float, grid: Grid,
             per_axis: int = 41, n_pairs: int = 500, seed: int = 0,
             check_inputs: bool = True) -> AssemblyReport:
    d = K.dim
    h = list(h)
    if len(h) != d + 1:
        raise ValueError(f"need {d + 1} generator approximants, got {len(h)}")
    sg = canonical_sg_set(d)
    if check_inputs:
        cert = midpoint_convexity_test(p, K, n_pairs=n_pairs, seed=seed)
        if not cert.passed:
            raise InputNotConvex(f"p fails midpoint convexity: witness {cert.witness}")
        for k, hk in enumerate(h):
            cert = midpoint_convexity_test(hk, K, n_pairs=n_pairs, seed=seed + k + 1)
            if not cert.passed:
                raise InputNotConvex(f"h_{k + 1} fails midpoint convexity: witness {cert.witness}")
    certs = []

    shift = shift_functional(p, K, per_axis)
    g = p + shift.to_polynomial()
    mono = monotone_nondecreasing_test(g, bounding_box(K, 1.0), per_axis=per_axis)
    certs.append(mono)
    if not mono.passed:
        raise MonotonicityFailed(f"g = p + l is not nondecreasing: witness {mono.witness}")

    delta = continuity_delta(g, K, eps, per_axis)
    bound = delta / math.sqrt(d)
    errs = [sup_norm_on_grid(add(h[k], scale(-1.0, sg.generators[k])), grid) for k in range(d + 1)]
    for k in range(d):
        if not errs[k] < bound:
            raise ApproximantsTooCoarse(f"|h_{k + 1} - l_{k + 1}| = {errs[k]:.3e} >= delta/sqrt(d) = {bound:.3e}")
    if not errs[d] < eps:
        raise ApproximantsTooCoarse(f"|h_{d + 1} - l_{d + 1}| = {errs[d]:.3e} >= eps = {eps:.3e}")

    composed = expand(Compose(g, tuple(h[:d])))
    rep = nonneg_representation(scale(-1.0, shift), d)
    approx = composed
    if rep.lambda0:
        approx = add(approx, Polynomial.constant(d, rep.lambda0))
    for lam, hk in zip(rep.lambdas, h):
        if lam:
            approx = add(approx, scale(lam, hk))
    approx = expand(approx)

    # h(x) must land in K* for Lemma-1 style convexity of g(h)
    H = np.column_stack([hk.evaluate(grid.points) for hk in h[:d]])
    guard = float(np.max(K.distance_batch(H)))

    cvx = midpoint_convexity_test(approx, K, n_pairs=n_pairs, seed=seed)
    certs.append(cvx)
    err = sup_norm_on_grid(add(approx, scale(-1.0, p)), grid)
    # p~ - p = (g(h) - g) + sum_k lambda_k (h_k - l_k)
    err_bound = eps + sum(rep.lambdas[k] * bound for k in range(d)) + rep.lambdas[d] * errs[d]
    return AssemblyReport(shift, g, delta, composed, approx, rep, err, err_bound, errs, eps, certs, guard)
