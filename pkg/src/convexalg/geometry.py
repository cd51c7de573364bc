"""Convex compact bodies in R^d: boxes, balls and bounded polytopes.

The 1-fattened body ``K* = {x : dist(x, K) <= 1}`` is never built explicitly;
membership is ``distance(K, x) <= 1`` and sup-norms over it are taken on
``bounding_box(K, 1)``, which contains it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from .errors import DimensionMismatch, EmptyGrid, Infeasible, OriginNotInterior, Unbounded, UnboundedBody
from .simplex import linprog_max

CHORD_TOL = 1e-10


class ConvexBody:
    dim: int

    def contains_batch(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def distance_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinatewise interval hull ``(lo, hi)``."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"body has dimension {self.dim}, point has {X.shape[1]}")
        return X


@dataclass(frozen=True)
class Box(ConvexBody):
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise DimensionMismatch("box bounds must have equal, positive length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def cube(a: float, b: float, d: int) -> "Box":
        return Box((a,) * d, (b,) * d)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains_batch(self, X, tol=0.0):
        return self.distance_batch(X) <= tol

    def distance_batch(self, X):
        X = self._batch(X)
        P = np.clip(X, self.lo, self.hi)
        return np.linalg.norm(X - P, axis=1)

    def bounds(self):
        return np.array(self.lo), np.array(self.hi)

    def to_json(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Ball(ConvexBody):
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.center:
            raise DimensionMismatch("ball center must be nonempty")
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains_batch(self, X, tol=0.0):
        X = self._batch(X)
        return np.linalg.norm(X - np.array(self.center), axis=1) <= self.radius + tol

    def distance_batch(self, X):
        X = self._batch(X)
        return np.maximum(np.linalg.norm(X - np.array(self.center), axis=1) - self.radius, 0.0)

    def bounds(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def to_json(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Polytope(ConvexBody):
    """``{x : normals[i] . x <= offsets[i]}``; must be bounded and nonempty."""

    normals: Tuple[Tuple[float, ...], ...]
    offsets: Tuple[float, ...]

    def __post_init__(self):
        normals = tuple(tuple(float(v) for v in n) for n in self.normals)
        offsets = tuple(float(v) for v in self.offsets)
        if not normals or len(normals) != len(offsets):
            raise DimensionMismatch("need one offset per normal")
        if len({len(n) for n in normals}) != 1:
            raise DimensionMismatch("normals have mixed dimensions")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        self.bounds()  # validates boundedness and nonemptiness

    @property
    def dim(self) -> int:
        return len(self.normals[0])

    @cached_property
    def _A(self) -> np.ndarray:
        return np.array(self.normals)

    @cached_property
    def _b(self) -> np.ndarray:
        return np.array(self.offsets)

    @cached_property
    def _norms(self) -> np.ndarray:
        return np.linalg.norm(self._A, axis=1)

    def contains_batch(self, X, tol=0.0):
        X = self._batch(X)
        slack = (X @ self._A.T - self._b) / self._norms
        return np.max(slack, axis=1) <= tol

    def distance_batch(self, X):
        X = self._batch(X)
        return np.array([self._distance(x) for x in X])

    def _distance(self, x: np.ndarray) -> float:
        A, b = self._A, self._b
        if np.all(A @ x - b <= 0.0):
            return 0.0
        # Projection onto {Ax <= b}: enumerate active sets and keep the KKT point.
        m, d = A.shape
        best = math.inf
        for k in range(1, min(m, d) + 1):
            for S in itertools.combinations(range(m), k):
                AS = A[list(S)]
                G = AS @ AS.T
                if abs(np.linalg.det(G)) < 1e-14:
                    continue
                mu = np.linalg.solve(G, AS @ x - b[list(S)])
                if np.any(mu < -1e-12):
                    continue
                z = x - AS.T @ mu
                if np.all(A @ z - b <= 1e-10 * (1 + np.abs(b))):
                    best = min(best, float(np.linalg.norm(x - z)))
            if best < math.inf:
                return best
        return best

    def bounds(self):
        return self._bounds

    @cached_property
    def _bounds(self):
        d = self.dim
        A = self._A
        # free x = xp - xn
        A_split = np.hstack([A, -A])
        lo, hi = np.empty(d), np.empty(d)
        for j in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(2 * d)
                c[j], c[d + j] = sign, -sign
                try:
                    res = linprog_max(c, A_split, self._b)
                except Unbounded as exc:
                    raise UnboundedBody(f"polytope unbounded along axis {j}") from exc
                except Infeasible as exc:
                    raise ValueError("polytope is empty") from exc
                if sign > 0:
                    hi[j] = res.value
                else:
                    lo[j] = -res.value
        return lo, hi

    def to_json(self):
        return {"type": "polytope", "normals": [list(n) for n in self.normals], "offsets": list(self.offsets)}


def simplex_body(d: int) -> Polytope:
    """The standard simplex ``{x >= 0, sum x <= 1}``."""
    normals = [tuple(-1.0 if i == j else 0.0 for i in range(d)) for j in range(d)]
    normals.append((1.0,) * d)
    return Polytope(tuple(normals), (0.0,) * d + (1.0,))


def body_from_json(obj: dict) -> ConvexBody:
    kind = obj.get("type")
    if kind == "box":
        return Box(tuple(obj["lo"]), tuple(obj["hi"]))
    if kind == "ball":
        return Ball(tuple(obj["center"]), obj["radius"])
    if kind == "polytope":
        return Polytope(tuple(tuple(n) for n in obj["normals"]), tuple(obj["offsets"]))
    raise ValueError(f"unknown body type {kind!r}")


# ---------------------------------------------------------------------------
# operations


def contains(K: ConvexBody, x, tol: float = 0.0) -> bool:
    return bool(K.contains_batch(np.asarray(x, dtype=float)[None, :] if np.ndim(x) == 1 else x, tol)[0])


def distance(K: ConvexBody, x) -> float:
    return float(K.distance_batch(np.asarray(x, dtype=float).reshape(1, -1))[0])


def fattened_contains(K: ConvexBody, x) -> bool:
    """Membership in the 1-fattening ``K*``."""
    return distance(K, x) <= 1.0


def bounding_box(K: ConvexBody, fatten: float = 0.0) -> Box:
    lo, hi = K.bounds()
    return Box(tuple(lo - fatten), tuple(hi + fatten))


@dataclass(frozen=True)
class Chord:
    """``{t : t*y in K}`` for a unit direction ``y``."""

    y: Tuple[float, ...]
    t_min: float
    t_max: float

    def points(self, ts) -> np.ndarray:
        return np.outer(np.asarray(ts, dtype=float), np.array(self.y))

    def lattice(self, n: int) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, n)

    @property
    def length(self) -> float:
        return self.t_max - self.t_min

    def to_json(self) -> dict:
        return {"y": list(self.y), "t_min": self.t_min, "t_max": self.t_max}


def _unit(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    n = np.linalg.norm(y)
    if n == 0:
        raise ValueError("direction must be nonzero")
    return y / n


def origin_is_interior(K: ConvexBody, radius: float) -> bool:
    probes = np.vstack([np.eye(K.dim), -np.eye(K.dim)]) * radius
    return bool(np.all(K.contains_batch(probes)))


def chord(K: ConvexBody, y, tol: float = CHORD_TOL) -> Chord:
    """Chord of ``K`` through the origin along ``y``, endpoints bisected to ``tol``.

    Returned endpoints are the inner ends of the final brackets, so
    ``t_min*y`` and ``t_max*y`` are members of ``K``.
    """
    y = _unit(y)
    if y.size != K.dim:
        raise DimensionMismatch(f"direction has dimension {y.size}, body {K.dim}")
    if not origin_is_interior(K, tol):
        raise OriginNotInterior("0 is not an interior point of the body")
    lo, hi = K.bounds()
    reach = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 1.0

    def endpoint(direction):
        inside, outside = 0.0, reach
        while outside - inside > tol:
            mid = 0.5 * (inside + outside)
            if K.contains_batch((mid * direction)[None, :])[0]:
                inside = mid
            else:
                outside = mid
        return inside

    return Chord(tuple(float(v) for v in y), -endpoint(-y), endpoint(y))


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    per_axis: int
    seed: int
    n_lattice: int

    def __len__(self):
        return self.points.shape[0]

    @property
    def lattice(self) -> np.ndarray:
        return self.points[: self.n_lattice]


def lattice_points(box: Box, per_axis: int) -> np.ndarray:
    axes = []
    for a, b in zip(box.lo, box.hi):
        axes.append(np.array([0.5 * (a + b)]) if per_axis == 1 else np.linspace(a, b, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def sample_points(K: ConvexBody, n: int, rng: np.random.Generator, max_rounds: int = 200) -> np.ndarray:
    """Uniform samples from ``K`` by rejection from its bounding box."""
    lo, hi = K.bounds()
    out = []
    have = 0
    for _ in range(max_rounds):
        if have >= n:
            break
        cand = rng.uniform(lo, hi, size=(max(2 * (n - have), 16), K.dim))
        keep = cand[K.contains_batch(cand)]
        out.append(keep)
        have += keep.shape[0]
    if have == 0 and n > 0:
        raise EmptyGrid("rejection sampling found no interior points")
    return np.vstack(out)[:n]


def make_grid(K: ConvexBody, per_axis: int, seed: int = 0) -> Grid:
    """Lattice over the bounding box filtered by membership, plus ``per_axis``
    seeded uniform samples."""
    if per_axis < 1:
        raise ValueError("per_axis must be positive")
    lat = lattice_points(bounding_box(K, 0.0), per_axis)
    lat = lat[K.contains_batch(lat)]
    rng = np.random.default_rng(seed)
    try:
        rnd = sample_points(K, per_axis, rng)
    except EmptyGrid:
        rnd = np.zeros((0, K.dim))
    pts = np.vstack([lat, rnd])
    if pts.shape[0] == 0:
        raise EmptyGrid("grid is empty; body is degenerate at this resolution")
    return Grid(points=pts, per_axis=per_axis, seed=seed, n_lattice=lat.shape[0])
