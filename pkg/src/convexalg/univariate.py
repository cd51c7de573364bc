"""Convex approximation on a segment in the algebra generated by one
increasing C^2 function ``h``, the Bernstein operator as a univariate convex
polynomial approximant, and the exponential-polynomial generators built on
``h(x) = exp(x)``.

Pipeline for a convex polynomial ``p`` on ``[a, b]``:

1. regularize ``p_delta = p + delta x^2 / 2`` so that ``p_delta'' >= delta``;
2. interpolate ``q = p_delta o h^{-1}`` on ``[h(a), h(b)]`` at Chebyshev points;
3. accept the first degree whose composite ``p_n o h`` has second derivative
   within ``0.9 delta`` of ``p_delta''`` and values within ``eps/2`` of
   ``p_delta`` on a lattice; then ``(p_n o h)'' >= 0.1 delta > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C

from .convexity import ConvexityCertificate, convexity_1d_test
from .errors import DegreeCapExceeded, InputNotConvex, OutOfRange
from .funcexpr import (
    Compose,
    ExpPoly,
    FunctionExpr,
    Polynomial,
    contains_max,
    expand,
    partial_derivative,
)
from .geometry import ConvexBody

N_CAP = 256
LATTICE = 512
MAX_EXP_HALF_WIDTH = 4.0
DEGREE_START = 8
DEGREE_STEP = 2


@dataclass(frozen=True)
class MonotoneGenerator:
    """An increasing C^2 function ``h`` on ``[a, b]`` with certified ``h' >= hprime_min > 0``."""

    h: FunctionExpr
    a: float
    b: float
    hprime_min: float
    dh: FunctionExpr
    d2h: FunctionExpr

    @staticmethod
    def certify(h: FunctionExpr, a: float, b: float, n: int = LATTICE) -> "MonotoneGenerator":
        if h.dim != 1 or contains_max(h):
            raise ValueError("generator must be a smooth function of one variable")
        if not a < b:
            raise ValueError("need a < b")
        dh = expand(partial_derivative(h, 0))
        d2h = expand(partial_derivative(dh, 0))
        xs = np.linspace(a, b, n)
        lo = float(np.min(dh.evaluate(xs)))
        if not lo > 0:
            raise ValueError(f"generator derivative is not positive on [{a}, {b}] (min {lo:.3e})")
        return MonotoneGenerator(h, float(a), float(b), lo, dh, d2h)

    @property
    def range(self):
        return self.h(self.a), self.h(self.b)

    def to_json(self) -> dict:
        return {"h": self.h.to_json(), "a": self.a, "b": self.b, "hprime_min": self.hprime_min}


def exp_generator(a: float, b: float) -> MonotoneGenerator:
    return MonotoneGenerator.certify(ExpPoly(1, {(1,): 1.0}), a, b)


def regularize(p: Polynomial, delta: float) -> Polynomial:
    """``p + delta x^2 / 2``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return p + Polynomial(1, {(2,): delta / 2.0})


def inverse_eval(gen: MonotoneGenerator, u: float, tol: float = 1e-13) -> float:
    """``h^{-1}(u)`` by bisection followed by a Newton polish."""
    lo_u, hi_u = gen.range
    slack = 1e-12 * (1.0 + abs(lo_u) + abs(hi_u))
    if not lo_u - slack <= u <= hi_u + slack:
        raise OutOfRange(f"{u} outside [{lo_u}, {hi_u}]")
    a, b = gen.a, gen.b
    target = tol * gen.hprime_min
    for _ in range(200):
        mid = 0.5 * (a + b)
        if gen.h(mid) < u:
            a = mid
        else:
            b = mid
        if b - a < 1e-6 * (gen.b - gen.a):
            break
    x = 0.5 * (a + b)
    for _ in range(50):
        r = gen.h(x) - u
        if abs(r) <= target:
            break
        x_new = min(max(x - r / gen.dh(x), gen.a), gen.b)
        if x_new == x:
            break
        x = x_new
    return x


def inverse_eval_many(gen: MonotoneGenerator, us: np.ndarray) -> np.ndarray:
    return np.array([inverse_eval(gen, float(u)) for u in us])


def q_derivatives(p_delta: Polynomial, gen: MonotoneGenerator, u: float):
    """``(q, q', q'')`` at ``u`` for ``q = p_delta o h^{-1}`` via inverse-function calculus."""
    x = inverse_eval(gen, u)
    return _q_at_x(p_delta, gen, np.array([x]))[:, 0]


def _q_at_x(p_delta: Polynomial, gen: MonotoneGenerator, xs: np.ndarray) -> np.ndarray:
    p1, p2 = p_delta.deriv(0), p_delta.deriv(0).deriv(0)
    h1, h2 = gen.dh.evaluate(xs), gen.d2h.evaluate(xs)
    q0 = p_delta.evaluate(xs)
    q1 = p1.evaluate(xs) / h1
    q2 = p2.evaluate(xs) / h1 ** 2 - p1.evaluate(xs) * h2 / h1 ** 3
    return np.vstack([q0, q1, q2])


# ---------------------------------------------------------------------------
# Chebyshev -> power basis, exactly


@lru_cache(maxsize=64)
def _shifted_chebyshev_power_rows(n: int, lo: Fraction, hi: Fraction):
    """Power-basis coefficients (in u) of T_k((2u - lo - hi)/(hi - lo)), k <= n."""
    A = 2 / (hi - lo)
    B = -(hi + lo) / (hi - lo)
    rows = [[Fraction(1)], [B, A]]
    for _ in range(2, n + 1):
        prev, cur = rows[-2], rows[-1]
        nxt = [Fraction(0)] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i] += 2 * B * c
            nxt[i + 1] += 2 * A * c
        for i, c in enumerate(prev):
            nxt[i] -= c
        rows.append(nxt)
    return rows[: n + 1]


def chebyshev_to_power(coef: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Exact rational change of basis, rounded once at the end."""
    rows = _shifted_chebyshev_power_rows(len(coef) - 1, Fraction(lo), Fraction(hi))
    out = [Fraction(0)] * len(coef)
    for c, row in zip(coef, rows):
        fc = Fraction(float(c))
        for i, r in enumerate(row):
            out[i] += fc * r
    return np.array([float(v) for v in out])


@dataclass
class Prop3Report:
    delta: float
    degree: int
    output: Compose
    chebyshev_coefficients: List[float]
    power_coefficients: List[float]
    interval: tuple
    value_error: float
    second_derivative_error: float
    second_derivative_min: float
    error_estimate: float
    eps: float
    conditioning: float
    scan: List[dict] = field(default_factory=list)
    certificates: List[ConvexityCertificate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.second_derivative_min >= 0 and self.error_estimate <= self.eps and all(
            c.passed for c in self.certificates)

    def expanded(self) -> FunctionExpr:
        return expand(self.output)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "degree": self.degree,
            "interval": list(self.interval),
            "value_error": self.value_error,
            "second_derivative_error": self.second_derivative_error,
            "second_derivative_min": self.second_derivative_min,
            "error_estimate": self.error_estimate,
            "conditioning": self.conditioning,
            "chebyshev_coefficients": self.chebyshev_coefficients,
            "power_coefficients": self.power_coefficients,
            "scan": self.scan,
            "certificates": [c.to_json() for c in self.certificates],
        }


def _composite_derivs(coeffs: np.ndarray, gen: MonotoneGenerator, xs: np.ndarray):
    """Values and second derivatives of ``p_n o h`` via the chain rule."""
    P = np.polynomial.Polynomial(coeffs)
    hx = gen.h.evaluate(xs)
    h1, h2 = gen.dh.evaluate(xs), gen.d2h.evaluate(xs)
    val = P(hx)
    d2 = P.deriv(2)(hx) * h1 ** 2 + P.deriv(1)(hx) * h2
    return val, d2


def prop3_pipeline(p: Polynomial, gen: MonotoneGenerator, eps: float, n_cap: int = N_CAP,
                   lattice: int = LATTICE, check_input: bool = True) -> Prop3Report:
    """Convex approximant of ``p`` of the form ``p_n(h(x))`` with sup-error at most ``eps``."""
    if p.dim != 1:
        raise ValueError("prop3_pipeline needs a univariate polynomial")
    a, b = gen.a, gen.b
    if check_input:
        cert = convexity_1d_test(lambda t: p.evaluate(t[:, None]), a, b, n=65, n_pairs=128)
        if not cert.passed:
            raise InputNotConvex(f"p is not convex on [{a}, {b}]: witness {cert.witness}")
    delta = eps / (1.0 + max(a * a, b * b))
    p_delta = regularize(p, delta)
    lo_u, hi_u = gen.range
    xs = np.linspace(a, b, lattice)
    target_val = p_delta.evaluate(xs)
    target_d2 = p_delta.deriv(0).deriv(0).evaluate(xs)
    us_abs = np.abs(gen.h.evaluate(xs))

    scan = []
    best = {"value_error": math.inf, "second_derivative_error": math.inf}
    n = DEGREE_START
    while n <= n_cap:
        # Chebyshev points of the first kind mapped to [h(a), h(b)]
        nodes = C.chebpts1(n + 1)
        us = 0.5 * (hi_u - lo_u) * nodes + 0.5 * (hi_u + lo_u)
        qs = p_delta.evaluate(inverse_eval_many(gen, us))
        cheb = C.chebfit(nodes, qs, n)
        power = chebyshev_to_power(cheb, lo_u, hi_u)
        val, d2 = _composite_derivs(power, gen, xs)
        e0 = float(np.max(np.abs(val - target_val)))
        e2 = float(np.max(np.abs(d2 - target_d2)))
        # roundoff scale of evaluating the power form: eps_mach * sum |c_k| |u|^k
        cond = float(np.max(np.polynomial.polynomial.polyval(us_abs, np.abs(power)))) * np.finfo(float).eps
        scan.append({"degree": n, "value_error": e0, "second_derivative_error": e2, "roundoff": cond})
        best["value_error"] = min(best["value_error"], e0)
        best["second_derivative_error"] = min(best["second_derivative_error"], e2)
        if e2 < 0.9 * delta and e0 < eps / 2:
            out = Compose(Polynomial.from_coeffs_1d(power), (gen.h,))
            pval = p.evaluate(xs)
            total = float(np.max(np.abs(val - pval)))
            d2min = float(np.min(d2))
            certs = [convexity_1d_test(lambda t: out.evaluate(t[:, None]), a, b, n=lattice, n_pairs=lattice,
                                       rel_tol=1e-12)]
            return Prop3Report(delta, n, out, [float(c) for c in cheb], [float(c) for c in power], (a, b),
                               e0, e2, d2min, total, eps, cond, scan, certs)
        if cond > eps / 2:
            raise DegreeCapExceeded(
                f"power-basis roundoff {cond:.2e} exceeds eps/2 at degree {n} before reaching accuracy", best)
        n += DEGREE_STEP
    raise DegreeCapExceeded(f"no degree <= {n_cap} met the thresholds", best)


def chebyshev_interpolant(p_delta: Polynomial, gen: MonotoneGenerator, n: int) -> C.Chebyshev:
    """Degree-``n`` Chebyshev interpolant of ``q = p_delta o h^{-1}`` (kept in the Chebyshev basis)."""
    lo_u, hi_u = gen.range
    nodes = C.chebpts1(n + 1)
    us = 0.5 * (hi_u - lo_u) * nodes + 0.5 * (hi_u + lo_u)
    qs = p_delta.evaluate(inverse_eval_many(gen, us))
    return C.Chebyshev(C.chebfit(nodes, qs, n), domain=[lo_u, hi_u])


# ---------------------------------------------------------------------------
# Bernstein


def bernstein_1d(samples, a: float = 0.0, b: float = 1.0) -> Polynomial:
    """Bernstein polynomial of degree ``len(samples) - 1`` on ``[a, b]`` in the monomial basis.

    ``samples[k] = f(a + k (b - a) / n)``.
    """
    f = [Fraction(float(v)) for v in samples]
    n = len(f) - 1
    if n < 1:
        raise ValueError("need at least two samples")
    # polynomial in s = (x - a)/(b - a), exact
    coeffs_s = [Fraction(0)] * (n + 1)
    for k, fk in enumerate(f):
        if fk == 0:
            continue
        # C(n,k) s^k (1-s)^(n-k) = C(n,k) sum_j C(n-k,j) (-1)^j s^(k+j)
        for j in range(n - k + 1):
            coeffs_s[k + j] += fk * math.comb(n, k) * math.comb(n - k, j) * (-1) ** j
    # substitute s = alpha x + beta
    fa, fb = Fraction(float(a)), Fraction(float(b))
    alpha = 1 / (fb - fa)
    beta = -fa / (fb - fa)
    coeffs_x = [Fraction(0)] * (n + 1)
    for i, c in enumerate(coeffs_s):
        if c == 0:
            continue
        for j in range(i + 1):
            coeffs_x[j] += c * math.comb(i, j) * alpha ** j * beta ** (i - j)
    return Polynomial.from_coeffs_1d([float(c) for c in coeffs_x])


def bernstein_approx(f, a: float, b: float, n: int) -> Polynomial:
    ts = np.linspace(a, b, n + 1)
    return bernstein_1d([f(t) for t in ts], a, b)


# ---------------------------------------------------------------------------
# exponential generators


@lru_cache(maxsize=64)
def _exp_axis_approx(sign: float, lo: float, hi: float, eps: float) -> Prop3Report:
    gen = exp_generator(lo, hi)
    return prop3_pipeline(Polynomial.from_coeffs_1d([0.0, sign]), gen, eps)


def exp_sg_approx(d: int, N: float, eps: float, reports: Optional[list] = None,
                  intervals: Optional[Sequence[Tuple[float, float]]] = None) -> List[ExpPoly]:
    """Convex exponential polynomials within ``eps`` of ``x_1, ..., x_d, -(x_1+...+x_d)``.

    The generators are fitted on ``[-N, N]`` along every axis, or on the
    per-axis ``intervals`` when given (each must lie inside ``[-N, N]``).
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if not 0 < N <= MAX_EXP_HALF_WIDTH:
        raise ValueError(f"half-width N must lie in (0, {MAX_EXP_HALF_WIDTH}]")
    if intervals is None:
        intervals = [(-float(N), float(N))] * d
    intervals = [(float(a), float(b)) for a, b in intervals]
    if len(intervals) != d:
        raise ValueError(f"need {d} intervals")
    for a, b in intervals:
        if not -N <= a < b <= N:
            raise ValueError(f"interval [{a}, {b}] is empty or leaves [-{N}, {N}]")
    up, down = [], []
    for a, b in intervals:
        up.append(_exp_axis_approx(1.0, a, b, float(eps)))
        down.append(_exp_axis_approx(-1.0, a, b, float(eps) / d))
    if reports is not None:
        reports.extend(up + down)
    out = [up[j].expanded().lift(d, j) for j in range(d)]
    last = down[0].expanded().lift(d, 0)
    for j in range(1, d):
        last = last + down[j].expanded().lift(d, j)
    out.append(last)
    return out


def convex_exp_approx(p: Polynomial, K: ConvexBody, eps: float, grid=None, per_axis: int = 41,
                      n_pairs: int = 500, seed: int = 0):
    """Convex exponential polynomial within the assembled error of a convex polynomial ``p`` on ``K``."""
    from . import sgcore
    from .geometry import make_grid

    d = K.dim
    lo, hi = K.bounds()
    N = float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))
    if N == 0.0:
        raise ValueError("degenerate body")
    if N > MAX_EXP_HALF_WIDTH:
        raise ValueError(f"body exceeds [-{MAX_EXP_HALF_WIDTH}, {MAX_EXP_HALF_WIDTH}]^d")
    if grid is None:
        grid = make_grid(K, 41 if d <= 2 else 15, seed)
    shift = sgcore.shift_functional(p, K, per_axis)
    g = p + shift.to_polynomial()
    delta = sgcore.continuity_delta(g, K, eps, per_axis)
    # strict inequalities downstream are checked on a different point set
    accuracy = 0.9 * min(delta / math.sqrt(d), eps)
    # fit on the coordinate hull of K: the power form in exp(x) is far better
    # conditioned on a tight interval than on the symmetric [-N, N]
    gens = exp_sg_approx(d, N, accuracy, intervals=list(zip(lo, hi)))
    return sgcore.assemble(p, gens, K, eps, grid, per_axis=per_axis, n_pairs=n_pairs, seed=seed)
