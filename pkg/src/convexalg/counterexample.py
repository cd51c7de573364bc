"""Evidence that ``d`` convex functions never generate all convex functions on ``K``.

Given a common chord minimizer ``x' = m*y`` (found by ``borsuk``), every
``f_j`` is within ``2*eps`` of a convex function ``g_eps = max(f - 2 eps, s)``
that is constant on a piece of the chord around ``x'``.  Those functions lie in
an algebra whose convex closure only contains functions minimized at ``x'`` on
the chord, and a quadratic centered at the far chord end stays a certified
distance away from all of them.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .borsuk import CommonDirection, find_common_direction_2d, find_common_direction_heuristic
from .convexity import ConvexityCertificate, line_minimize, midpoint_convexity_test
from .errors import CertificateFailed, Infeasible, NotConverged
from .funcexpr import AffineFunc, FunctionExpr, Max, Polynomial, add, sq_distance
from .geometry import Chord, ConvexBody, Grid, chord, make_grid
from .simplex import linprog_max

PLATEAU_TOL = 1e-9
SANDWICH_TOL = 1e-9
CHORD_SAMPLES = 2001


@dataclass(frozen=True)
class PinnedChord:
    y: tuple
    chord: Chord
    m: float

    def __post_init__(self):
        if not (self.chord.t_min - 1e-12 <= self.m <= self.chord.t_max + 1e-12):
            raise ValueError(f"m={self.m} lies outside the chord [{self.chord.t_min}, {self.chord.t_max}]")

    @property
    def x_prime(self) -> np.ndarray:
        return self.m * np.array(self.y)

    def to_json(self) -> dict:
        return {"y": list(self.y), "m": self.m, "x_prime": [float(v) for v in self.x_prime],
                "chord": self.chord.to_json()}


def pin_chord(K: ConvexBody, y, m: float) -> PinnedChord:
    ch = chord(K, y)
    return PinnedChord(ch.y, ch, float(m))


def delta_prime_check(f: FunctionExpr, pc: PinnedChord, K: ConvexBody, tol: float = 1e-9) -> bool:
    """Is ``x'`` a chord minimizer of ``f`` (to ``tol``)?"""
    lm = line_minimize(f, K, pc.y, ch=pc.chord)
    return bool(lm.value >= f(pc.x_prime) - tol)


@dataclass
class SeparationResult:
    s: AffineFunc
    margin: float
    pin_error: float
    slack: float

    def to_json(self) -> dict:
        return {"s": self.s.to_json(), "margin": self.margin, "pin_error": self.pin_error,
                "lp_slack": self.slack}


def _slope_bound(fvals: np.ndarray, K: ConvexBody, eps: float) -> float:
    # an affine minorant pinned inside K cannot rise faster than the oscillation
    # of f over the narrowest half-width of K; 10x leaves room for the grid
    lo, hi = K.bounds()
    half = 0.5 * float(np.min(hi - lo))
    return 10.0 * (float(fvals.max() - fvals.min()) + eps) / half


def separating_support(f: FunctionExpr, K: ConvexBody, pc: PinnedChord, eps: float, G: Grid,
                       tol: float = 1e-9) -> SeparationResult:
    """Affine ``s`` constant along ``y``, ``s(x') = f(x') - eps``, with maximal slack under ``f`` on ``G``.

    Writes ``b = f(x') - eps - a.x'`` and ``sigma = sigma0 + tau`` where ``sigma0``
    is the slack of ``a = 0``; every right-hand side is then nonnegative.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not delta_prime_check(f, pc, K, tol):
        raise Infeasible("x' is not a chord minimizer of f")
    d = K.dim
    y = np.array(pc.y)
    xp = pc.x_prime
    X = np.vstack([G.points, xp[None, :]])
    fx = f.evaluate(X)
    fp = float(f(xp))
    rhs0 = fx - fp + eps
    sigma0 = float(rhs0.min())
    A_bound = _slope_bound(fx, K, eps)

    # variables: a+ (d), a- (d), tau
    D = X - xp
    n = X.shape[0]
    A_ub = np.zeros((n + 2 * d, 2 * d + 1))
    A_ub[:n, :d] = D
    A_ub[:n, d:2 * d] = -D
    A_ub[:n, -1] = 1.0
    A_ub[n:n + 2 * d, :2 * d] = np.eye(2 * d)
    b_ub = np.concatenate([rhs0 - sigma0, np.full(2 * d, A_bound)])
    A_eq = np.concatenate([y, -y, [0.0]])[None, :]
    c = np.zeros(2 * d + 1)
    c[-1] = 1.0
    res = linprog_max(c, A_ub, b_ub, A_eq, [0.0])
    a = res.x[:d] - res.x[d:2 * d]
    a = a - (a @ y) * y  # exact constancy along the chord
    b = fp - eps - float(a @ xp)
    s = AffineFunc(tuple(float(v) for v in a), float(b))
    margin = float(np.min(fx - s.evaluate(X)))
    if margin < -tol:
        raise Infeasible(f"no affine minorant pinned at f(x') - eps: best slack {margin:.3e}")
    pin_error = abs(float(s(xp)) - (fp - eps))
    return SeparationResult(s, max(margin, 0.0), pin_error, sigma0 + float(res.x[-1]))


@dataclass
class GEpsReport:
    g: Max
    eps: float
    plateau: tuple
    plateau_oscillation: float
    sandwich_max: float
    sandwich_min: float
    certificates: List[ConvexityCertificate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "g_eps": self.g.to_json(),
            "plateau": list(self.plateau),
            "plateau_oscillation": self.plateau_oscillation,
            "sandwich": {"min_f_minus_g": self.sandwich_min, "max_f_minus_g": self.sandwich_max},
            "certificates": [c.to_json() for c in self.certificates],
        }


def g_eps_construct(f: FunctionExpr, sr: SeparationResult, pc: PinnedChord, eps: float, K: ConvexBody,
                    G: Grid, n_pairs: int = 500, seed: int = 0) -> GEpsReport:
    d = K.dim
    g = Max((add(f, Polynomial.constant(d, -2.0 * eps)), sr.s))
    X = G.points
    diff = f.evaluate(X) - g.evaluate(X)
    lo, hi = float(diff.min()), float(diff.max())
    upper = 2.0 * eps
    ok = lo >= min(2.0 * eps, sr.margin) - SANDWICH_TOL and hi <= upper + SANDWICH_TOL
    sandwich = ConvexityCertificate("sandwich", "pass" if ok else "fail", X.shape[0], SANDWICH_TOL,
                                    None, max(0.0, -lo, hi - upper), {"grid_points": X.shape[0]})
    if not ok:
        raise CertificateFailed("sandwich", f"f - g_eps ranges over [{lo:.3e}, {hi:.3e}], expected within "
                                            f"[{min(2 * eps, sr.margin):.3e}, {upper:.3e}]")

    # plateau: where f <= f(x') + eps on the chord, g_eps equals f(x') - eps
    ts = np.union1d(pc.chord.lattice(CHORD_SAMPLES), [pc.m])
    P = pc.chord.points(ts)
    fp = float(f(pc.x_prime))
    inside = f.evaluate(P) <= fp + eps - PLATEAU_TOL
    level = fp - eps
    if inside.any():
        # the connected run of samples around m
        k = int(np.searchsorted(ts, pc.m))
        k = min(max(k, 0), ts.size - 1)
        lo_k = hi_k = k
        while lo_k > 0 and inside[lo_k - 1]:
            lo_k -= 1
        while hi_k < ts.size - 1 and inside[hi_k + 1]:
            hi_k += 1
        plateau = (float(ts[lo_k]), float(ts[hi_k]))
        osc = float(np.max(np.abs(g.evaluate(P[lo_k:hi_k + 1]) - level)))
    else:
        plateau, osc = (pc.m, pc.m), float("inf")
    plateau_ok = plateau[1] > plateau[0] and plateau[0] <= pc.m <= plateau[1] and osc <= PLATEAU_TOL
    plat = ConvexityCertificate("plateau", "pass" if plateau_ok else "fail", int(ts.size), PLATEAU_TOL,
                                None, osc if np.isfinite(osc) else 1.0, {"chord_samples": int(ts.size)})
    if not plateau_ok:
        raise CertificateFailed("plateau", f"plateau {plateau} around m={pc.m} has oscillation {osc:.3e}")

    cvx = midpoint_convexity_test(g, K, n_pairs=n_pairs, seed=seed)
    if not cvx.passed:
        raise CertificateFailed("convexity", f"g_eps fails midpoint convexity: witness {cvx.witness}")
    return GEpsReport(g, eps, plateau, osc, hi, lo, [sandwich, plat, cvx])


def nonapprox_bound(w: FunctionExpr, pc: PinnedChord, K: ConvexBody, tol: float = 1e-10) -> float:
    """Lower bound on the chord-uniform distance from ``w`` to any function minimized at ``x'``."""
    lm = line_minimize(w, K, pc.y, tol, ch=pc.chord)
    return max(0.0, 0.5 * (float(w(pc.x_prime)) - lm.value))


def far_endpoint(pc: PinnedChord) -> float:
    ch = pc.chord
    return ch.t_min if abs(ch.t_min - pc.m) > abs(ch.t_max - pc.m) else ch.t_max


def sample_delta_prime(pc: PinnedChord, rng: np.random.Generator) -> FunctionExpr:
    """A random convex function whose chord minimum sits at ``x'``.

    ``max(q, l)`` with ``q`` a convex quadratic whose gradient at ``x'`` is
    orthogonal to ``y``, and ``l`` affine, constant along ``y``, below ``q(x')``.
    """
    y = np.array(pc.y)
    d = y.size
    xp = pc.x_prime
    B = rng.standard_normal((d, d))
    A = B @ B.T + 0.1 * np.eye(d)
    b = rng.standard_normal(d)
    b -= (b @ y) * y
    c = float(rng.uniform(-1.0, 1.0))
    # q(x) = (x - x')^T A (x - x') + b.(x - x') + c, expanded into monomials
    terms = {}

    def put(alpha, v):
        terms[alpha] = terms.get(alpha, 0.0) + v

    zero = (0,) * d
    put(zero, c + float(xp @ A @ xp) - float(b @ xp))
    for i in range(d):
        ei = tuple(1 if k == i else 0 for k in range(d))
        put(ei, float(b[i] - 2.0 * (A[i] @ xp)))
        for j in range(d):
            alpha = tuple((k == i) + (k == j) for k in range(d))
            put(alpha, float(A[i, j]))
    q = Polynomial(d, terms)
    u = rng.standard_normal(d)
    u -= (u @ y) * y
    drop = float(rng.uniform(0.0, 1.0))
    ell = AffineFunc(tuple(float(v) for v in u), c - drop - float(u @ xp))
    return Max((q, ell))


def chord_sup_distance(w: FunctionExpr, g: FunctionExpr, pc: PinnedChord, n: int = CHORD_SAMPLES) -> float:
    ts = np.union1d(pc.chord.lattice(n), [pc.m])
    P = pc.chord.points(ts)
    return float(np.max(np.abs(w.evaluate(P) - g.evaluate(P))))


@dataclass
class Theorem1bReport:
    direction: CommonDirection
    pinned: PinnedChord
    eps: float
    tol: float
    delta_prime: List[bool]
    g_reports: List[GEpsReport]
    separations: List[SeparationResult]
    witness: FunctionExpr
    witness_center: float
    bound: float
    soundness_min_gap: float
    soundness_samples: int

    @property
    def passed(self) -> bool:
        return (self.direction.success and all(self.delta_prime) and all(r.passed for r in self.g_reports)
                and self.bound > 0 and self.soundness_min_gap >= -1e-9)

    def to_json(self) -> dict:
        return {
            "direction": self.direction.to_json(),
            "pinned_chord": self.pinned.to_json(),
            "eps": self.eps,
            "tol": self.tol,
            "delta_prime": self.delta_prime,
            "functions": [{"separation": s.to_json(), "g_eps": r.to_json()}
                          for s, r in zip(self.separations, self.g_reports)],
            "witness": {"expr": self.witness.to_json(), "t_center": self.witness_center},
            "nonapprox_bound": self.bound,
            "soundness": {"samples": self.soundness_samples, "min_distance_minus_bound": self.soundness_min_gap},
        }


def theorem1b_demo(f_list: Sequence[FunctionExpr], K: ConvexBody, eps: float, tol: float = 1e-7, seed: int = 0,
                   per_axis: int = 41, n_members: int = 100, n_pairs: int = 500) -> Theorem1bReport:
    f_list = list(f_list)
    d = K.dim
    if len(f_list) != d:
        raise ValueError(f"need {d} functions on a {d}-dimensional body")
    if d == 1:
        raise ValueError("the construction needs d >= 2")
    if d == 2:
        cd = find_common_direction_2d(f_list[0], f_list[1], K, tol=tol)
    else:
        try:
            cd = find_common_direction_heuristic(f_list, K, tol=max(tol, 1e-4), seed=seed)
        except NotConverged as exc:
            cd = exc.result
    pc = pin_chord(K, cd.y, cd.m)
    # a residual r shifts each minimizer by at most r, so f(x') exceeds the
    # chord minimum by at most r * (chord-slope of f near x')
    dp_tol = max(tol, cd.residual) * 10.0 * (1.0 + max(float(np.max(np.abs(f.evaluate(
        pc.chord.points(pc.chord.lattice(65)))))) for f in f_list))
    checks = [delta_prime_check(f, pc, K, dp_tol) for f in f_list]

    G = make_grid(K, per_axis, seed)
    G = Grid(np.vstack([G.points, pc.chord.points(pc.chord.lattice(201))]), G.per_axis, G.seed, G.n_lattice)
    seps, reps = [], []
    for k, f in enumerate(f_list):
        sr = separating_support(f, K, pc, eps, G, tol=dp_tol)
        seps.append(sr)
        reps.append(g_eps_construct(f, sr, pc, eps, K, G, n_pairs=n_pairs, seed=seed + k))

    t_w = far_endpoint(pc)
    w = sq_distance(list(t_w * np.array(pc.y)))
    bound = nonapprox_bound(w, pc, K)

    rng = np.random.default_rng(seed)
    gap = float("inf")
    for _ in range(n_members):
        g = sample_delta_prime(pc, rng)
        gap = min(gap, chord_sup_distance(w, g, pc) - bound)
    return Theorem1bReport(cd, pc, eps, tol, checks, reps, seps, w, t_w, bound, gap, n_members)


def chord_profile(f: FunctionExpr, g: FunctionExpr, pc: PinnedChord, n: int = 201) -> List[tuple]:
    ts = pc.chord.lattice(n)
    P = pc.chord.points(ts)
    return list(zip(ts.tolist(), f.evaluate(P).tolist(), g.evaluate(P).tolist()))


def write_chord_profile(path, rows: Sequence[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "f", "g_eps"])
        for r in rows:
            wr.writerow([repr(float(v)) for v in r])
