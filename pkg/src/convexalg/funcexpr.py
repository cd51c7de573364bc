"""Symbolic function trees: affine maps, polynomials, exponential polynomials,
pointwise maxima, sums, scalings and polynomial compositions.

Every node is immutable and knows its ambient dimension ``dim``.  Nodes are
evaluated either at a single point (``e(x)``) or on a batch of points
(``e.evaluate(X)`` with ``X`` of shape ``(n, dim)``).

Exponential polynomials store their exponent vectors as tuples of Python
ints, so membership in the algebra of nonnegative-integer exponents is an
exact property of the data, never of floating point arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotSmooth

MultiIndex = Tuple[int, ...]

# rows per chunk when a batch evaluation would build a large (points x terms) matrix
_CHUNK = 4096
# above this exponent the exponential sum is accumulated in the log domain
_LOG_DOMAIN_THRESHOLD = 700.0


def _as_batch(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        if dim == 1 and X.shape[0] != 1:
            X = X[:, None]
        else:
            X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got shape {X.shape}")
    return X


def _clean_terms(terms: Mapping, dim: int, *, nonneg: bool) -> Dict[MultiIndex, float]:
    out: Dict[MultiIndex, float] = {}
    for alpha, c in terms.items():
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != dim:
            raise DimensionMismatch(f"multi-index {alpha} does not have length {dim}")
        if nonneg and any(a < 0 for a in alpha):
            raise ValueError(f"exponent {alpha} is not componentwise nonnegative")
        c = float(c)
        if c != 0.0:
            out[alpha] = out.get(alpha, 0.0) + c
    return {k: v for k, v in sorted(out.items()) if v != 0.0}


class FunctionExpr:
    """Base class of all expression nodes."""

    dim: int

    def evaluate(self, X) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return float(self.evaluate(x)[0])

    def to_json(self) -> dict:
        raise NotImplementedError

    # linear-space sugar
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dim, other)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return scale(-1.0, self)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return add(self, Polynomial.constant(self.dim, -other))
        return add(self, scale(-1.0, other))

    def __rsub__(self, other):
        return add(scale(-1.0, self), Polynomial.constant(self.dim, other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(other, self)
        return multiply(self, other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=True)
class AffineFunc(FunctionExpr):
    """``offset + coef . x``."""

    coef: Tuple[float, ...]
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coef", tuple(float(c) for c in self.coef))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.coef)

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return X @ np.array(self.coef) + self.offset

    def to_polynomial(self) -> "Polynomial":
        terms = {(0,) * self.dim: self.offset}
        for j, c in enumerate(self.coef):
            alpha = [0] * self.dim
            alpha[j] = 1
            terms[tuple(alpha)] = c
        return Polynomial(self.dim, terms)

    def to_json(self) -> dict:
        return {"type": "affine", "coef": list(self.coef), "offset": self.offset}

    @staticmethod
    def coordinate(d: int, j: int) -> "AffineFunc":
        coef = [0.0] * d
        coef[j] = 1.0
        return AffineFunc(tuple(coef), 0.0)


@dataclass(frozen=True, eq=True)
class Polynomial(FunctionExpr):
    """Multivariate polynomial; ``terms`` maps multi-indices to coefficients."""

    dim: int
    terms: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean_terms(self.terms, self.dim, nonneg=True))

    __hash__ = None

    @staticmethod
    def constant(d: int, c: float) -> "Polynomial":
        return Polynomial(d, {(0,) * d: c})

    @staticmethod
    def variable(d: int, j: int) -> "Polynomial":
        alpha = [0] * d
        alpha[j] = 1
        return Polynomial(d, {tuple(alpha): 1.0})

    @staticmethod
    def from_coeffs_1d(coeffs: Sequence[float]) -> "Polynomial":
        """Univariate polynomial from ascending coefficients."""
        return Polynomial(1, {(k,): c for k, c in enumerate(coeffs)})

    def coeffs_1d(self) -> np.ndarray:
        if self.dim != 1:
            raise DimensionMismatch("coeffs_1d needs a univariate polynomial")
        out = np.zeros(self.degree + 1)
        for (k,), c in self.terms.items():
            out[k] = c
        return out

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        if not self.terms:
            return np.zeros(X.shape[0])
        if self.dim == 1:
            return np.polynomial.polynomial.polyval(X[:, 0], self.coeffs_1d())
        exps = np.array(list(self.terms.keys()), dtype=float)
        coefs = np.array(list(self.terms.values()))
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], _CHUNK):
            blk = X[s:s + _CHUNK]
            mon = np.prod(blk[:, None, :] ** exps[None, :, :], axis=2)
            out[s:s + _CHUNK] = mon @ coefs
        return out

    # ring operations
    def __add__(self, other):
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise DimensionMismatch("polynomial dimensions differ")
            terms = dict(self.terms)
            for a, c in other.terms.items():
                terms[a] = terms.get(a, 0.0) + c
            return Polynomial(self.dim, terms)
        return FunctionExpr.__add__(self, other)

    __radd__ = __add__

    def scaled(self, c: float) -> "Polynomial":
        return Polynomial(self.dim, {a: c * v for a, v in self.terms.items()})

    def times(self, other: "Polynomial") -> "Polynomial":
        if other.dim != self.dim:
            raise DimensionMismatch("polynomial dimensions differ")
        terms: Dict[MultiIndex, float] = {}
        for a, c in self.terms.items():
            for b, e in other.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                terms[k] = terms.get(k, 0.0) + c * e
        return Polynomial(self.dim, terms)

    def deriv(self, j: int) -> "Polynomial":
        terms = {}
        for a, c in self.terms.items():
            if a[j] > 0:
                b = list(a)
                b[j] -= 1
                terms[tuple(b)] = c * a[j]
        return Polynomial(self.dim, terms)

    def to_json(self) -> dict:
        return {
            "type": "poly",
            "dim": self.dim,
            "terms": [[list(a), c] for a, c in self.terms.items()],
        }


@dataclass(frozen=True, eq=True)
class ExpPoly(FunctionExpr):
    """Exponential polynomial ``sum_a c_a exp(a . x)`` with ``a`` in Z_+^d."""

    dim: int
    terms: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean_terms(self.terms, self.dim, nonneg=True))

    __hash__ = None

    @staticmethod
    def constant(d: int, c: float) -> "ExpPoly":
        return ExpPoly(d, {(0,) * d: c})

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        if not self.terms:
            return np.zeros(X.shape[0])
        A = np.array(list(self.terms.keys()), dtype=float)
        c = np.array(list(self.terms.values()))
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], _CHUNK):
            Z = X[s:s + _CHUNK] @ A.T
            zmax = Z.max(axis=1)
            big = zmax > _LOG_DOMAIN_THRESHOLD
            blk = np.empty(Z.shape[0])
            if not big.all():
                blk[~big] = np.exp(Z[~big]) @ c
            if big.any():
                blk[big] = _logdomain_sum(Z[big], c)
            out[s:s + _CHUNK] = blk
        return out

    def __add__(self, other):
        if isinstance(other, ExpPoly):
            if other.dim != self.dim:
                raise DimensionMismatch("exponential polynomial dimensions differ")
            terms = dict(self.terms)
            for a, v in other.terms.items():
                terms[a] = terms.get(a, 0.0) + v
            return ExpPoly(self.dim, terms)
        return FunctionExpr.__add__(self, other)

    __radd__ = __add__

    def scaled(self, c: float) -> "ExpPoly":
        return ExpPoly(self.dim, {a: c * v for a, v in self.terms.items()})

    def times(self, other: "ExpPoly") -> "ExpPoly":
        if other.dim != self.dim:
            raise DimensionMismatch("exponential polynomial dimensions differ")
        terms: Dict[MultiIndex, float] = {}
        for a, c in self.terms.items():
            for b, e in other.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                terms[k] = terms.get(k, 0.0) + c * e
        return ExpPoly(self.dim, terms)

    def deriv(self, j: int) -> "ExpPoly":
        return ExpPoly(self.dim, {a: c * a[j] for a, c in self.terms.items()})

    def lift(self, d: int, axis: int) -> "ExpPoly":
        """Embed a univariate exponential polynomial as a function of ``x[axis]``."""
        if self.dim != 1:
            raise DimensionMismatch("lift needs a univariate exponential polynomial")
        terms = {}
        for (k,), c in self.terms.items():
            alpha = [0] * d
            alpha[axis] = k
            terms[tuple(alpha)] = c
        return ExpPoly(d, terms)

    def to_json(self) -> dict:
        return {
            "type": "exp",
            "dim": self.dim,
            "terms": [[list(a), c] for a, c in self.terms.items()],
        }


def _logdomain_sum(Z: np.ndarray, c: np.ndarray) -> np.ndarray:
    logc = np.log(np.abs(c))
    W = Z + logc[None, :]
    m = W.max(axis=1)
    s = (np.exp(W - m[:, None]) * np.sign(c)[None, :]).sum(axis=1)
    with np.errstate(over="ignore", divide="ignore"):
        return np.sign(s) * np.exp(m + np.log(np.abs(s)))


@dataclass(frozen=True, eq=True)
class Max(FunctionExpr):
    items: Tuple[FunctionExpr, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise ValueError("Max needs at least one item")
        _check_same_dim(items)
        object.__setattr__(self, "items", items)

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.items[0].dim

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.max(np.vstack([e.evaluate(X) for e in self.items]), axis=0)

    def to_json(self) -> dict:
        return {"type": "max", "items": [e.to_json() for e in self.items]}


@dataclass(frozen=True, eq=True)
class Sum(FunctionExpr):
    items: Tuple[FunctionExpr, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise ValueError("Sum needs at least one item")
        _check_same_dim(items)
        object.__setattr__(self, "items", items)

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.items[0].dim

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        out = np.zeros(X.shape[0])
        for e in self.items:
            out = out + e.evaluate(X)
        return out

    def to_json(self) -> dict:
        return {"type": "sum", "items": [e.to_json() for e in self.items]}


@dataclass(frozen=True, eq=True)
class Scale(FunctionExpr):
    c: float
    expr: FunctionExpr

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.expr.dim

    def evaluate(self, X) -> np.ndarray:
        return self.c * self.expr.evaluate(X)

    def to_json(self) -> dict:
        return {"type": "scale", "c": self.c, "expr": self.expr.to_json()}


@dataclass(frozen=True, eq=True)
class Compose(FunctionExpr):
    """``outer(inner[0](x), ..., inner[m-1](x))`` with a polynomial outer map."""

    outer: Polynomial
    inner: Tuple[FunctionExpr, ...]

    def __post_init__(self):
        inner = tuple(self.inner)
        if len(inner) != self.outer.dim:
            raise DimensionMismatch(
                f"outer polynomial has {self.outer.dim} variables but {len(inner)} inner functions given"
            )
        _check_same_dim(inner)
        object.__setattr__(self, "inner", inner)

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.inner[0].dim

    def evaluate(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        U = np.column_stack([e.evaluate(X) for e in self.inner])
        return self.outer.evaluate(U)

    def to_json(self) -> dict:
        return {
            "type": "compose",
            "outer": self.outer.to_json(),
            "inner": [e.to_json() for e in self.inner],
        }


def _check_same_dim(items: Iterable[FunctionExpr]) -> None:
    dims = {e.dim for e in items}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed ambient dimensions {sorted(dims)}")


# ---------------------------------------------------------------------------
# constructors and algebra


def sq_distance(center: Sequence[float]) -> Polynomial:
    """``x -> |x - center|^2`` as a polynomial."""
    d = len(center)
    terms: Dict[MultiIndex, float] = {(0,) * d: float(sum(c * c for c in center))}
    for j, c in enumerate(center):
        a2 = [0] * d
        a2[j] = 2
        a1 = [0] * d
        a1[j] = 1
        terms[tuple(a2)] = 1.0
        terms[tuple(a1)] = terms.get(tuple(a1), 0.0) - 2.0 * c
    return Polynomial(d, terms)


def _constant_value(e: FunctionExpr):
    """The value of ``e`` if it is a constant leaf, else None."""
    if isinstance(e, AffineFunc) and not any(e.coef):
        return e.offset
    if isinstance(e, (Polynomial, ExpPoly)):
        if not e.terms:
            return 0.0
        if len(e.terms) == 1 and not any(next(iter(e.terms))):
            return next(iter(e.terms.values()))
    return None


def add(e1: FunctionExpr, e2: FunctionExpr) -> FunctionExpr:
    """Sum of two expressions, merging like-typed leaves."""
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"cannot add dimensions {e1.dim} and {e2.dim}")
    if isinstance(e1, AffineFunc) and isinstance(e2, AffineFunc):
        return AffineFunc(tuple(a + b for a, b in zip(e1.coef, e2.coef)), e1.offset + e2.offset)
    return _merge_sum(_flatten(e1) + _flatten(e2))


def _flatten(e: FunctionExpr):
    return list(e.items) if isinstance(e, Sum) else [e]


def _merge_sum(items) -> FunctionExpr:
    d = items[0].dim
    poly = None
    expo = None
    rest = []
    for e in items:
        if isinstance(e, AffineFunc):
            e = e.to_polynomial()
        if isinstance(e, Polynomial):
            poly = e if poly is None else Polynomial.__add__(poly, e)
        elif isinstance(e, ExpPoly):
            expo = e if expo is None else ExpPoly.__add__(expo, e)
        else:
            rest.append(e)
    # constants belong to both leaf algebras; fold them into the exponential part
    if poly is not None and expo is not None:
        c = _constant_value(poly)
        if c is not None:
            expo = ExpPoly.__add__(expo, ExpPoly.constant(d, c))
            poly = None
    if poly is not None and poly.is_zero() and (expo is not None or rest):
        poly = None
    leaves = [x for x in (poly, expo) if x is not None] + rest
    if not leaves:
        return Polynomial(d, {})
    if len(leaves) == 1:
        return leaves[0]
    return Sum(tuple(leaves))


def scale(c: float, e: FunctionExpr) -> FunctionExpr:
    c = float(c)
    if isinstance(e, AffineFunc):
        return AffineFunc(tuple(c * a for a in e.coef), c * e.offset)
    if isinstance(e, (Polynomial, ExpPoly)):
        return e.scaled(c)
    if isinstance(e, Sum):
        return _merge_sum([scale(c, x) for x in e.items])
    if isinstance(e, Scale):
        return scale(c * e.c, e.expr) if c * e.c != 1.0 else e.expr
    if c == 1.0:
        return e
    return Scale(c, e)


_PRODUCT = Polynomial(2, {(1, 1): 1.0})


def multiply(e1: FunctionExpr, e2: FunctionExpr) -> FunctionExpr:
    """Pointwise product; stays inside a leaf algebra when possible."""
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"cannot multiply dimensions {e1.dim} and {e2.dim}")
    for a, b in ((e1, e2), (e2, e1)):
        c = _constant_value(a)
        if c is not None:
            return scale(c, b)
    p1 = e1.to_polynomial() if isinstance(e1, AffineFunc) else e1
    p2 = e2.to_polynomial() if isinstance(e2, AffineFunc) else e2
    if isinstance(p1, Polynomial) and isinstance(p2, Polynomial):
        return p1.times(p2)
    if isinstance(p1, ExpPoly) and isinstance(p2, ExpPoly):
        return p1.times(p2)
    return Compose(_PRODUCT, (e1, e2))


def _compose_ring(outer: Polynomial, inner, one):
    """Expand ``outer(inner)`` using the ring operations of the inner leaves."""
    powers = [dict() for _ in inner]

    def power(k, n):
        cache = powers[k]
        if n not in cache:
            if n == 0:
                cache[n] = one
            elif n == 1:
                cache[n] = inner[k]
            else:
                half = power(k, n // 2)
                sq = half.times(half)
                cache[n] = sq.times(inner[k]) if n % 2 else sq
        return cache[n]

    total = one.scaled(0.0)
    for beta, c in outer.terms.items():
        term = one.scaled(c)
        for k, n in enumerate(beta):
            if n:
                term = term.times(power(k, n))
        total = total + term
    return total


def compose_poly(outer: Polynomial, inner: Sequence[ExpPoly]) -> ExpPoly:
    """Fully expanded ``outer(inner_1, ..., inner_m)`` for exponential-polynomial inners."""
    inner = list(inner)
    if len(inner) != outer.dim:
        raise DimensionMismatch(f"outer has {outer.dim} variables, got {len(inner)} inner functions")
    if not inner:
        raise DimensionMismatch("compose_poly needs at least one inner function")
    _check_same_dim(inner)
    return _compose_ring(outer, inner, ExpPoly.constant(inner[0].dim, 1.0))


def compose_polys(outer: Polynomial, inner: Sequence[Polynomial]) -> Polynomial:
    inner = list(inner)
    if len(inner) != outer.dim:
        raise DimensionMismatch(f"outer has {outer.dim} variables, got {len(inner)} inner functions")
    _check_same_dim(inner)
    return _compose_ring(outer, inner, Polynomial.constant(inner[0].dim, 1.0))


def expand(e: FunctionExpr) -> FunctionExpr:
    """Collapse compositions, sums and scalings of leaves into a single leaf where
    the leaf algebra allows it.  Max nodes are kept (their items are expanded)."""
    if isinstance(e, (AffineFunc, Polynomial, ExpPoly)):
        return e
    if isinstance(e, Sum):
        return _merge_sum([expand(x) for x in e.items])
    if isinstance(e, Scale):
        return scale(e.c, expand(e.expr))
    if isinstance(e, Max):
        return Max(tuple(expand(x) for x in e.items))
    if isinstance(e, Compose):
        inner = [expand(x) for x in e.inner]
        inner = [x.to_polynomial() if isinstance(x, AffineFunc) else x for x in inner]
        consts = [_constant_value(x) for x in inner]
        if all(isinstance(x, Polynomial) for x in inner):
            return compose_polys(e.outer, inner)
        if all(isinstance(x, ExpPoly) or c is not None for x, c in zip(inner, consts)):
            inner = [x if isinstance(x, ExpPoly) else ExpPoly.constant(x.dim, c) for x, c in zip(inner, consts)]
            return compose_poly(e.outer, inner)
        return Compose(e.outer, tuple(inner))
    raise TypeError(f"unknown node {type(e).__name__}")


def partial_derivative(e: FunctionExpr, j: int) -> FunctionExpr:
    """Exact symbolic derivative with respect to ``x[j]``."""
    if not 0 <= j < e.dim:
        raise DimensionMismatch(f"axis {j} out of range for dimension {e.dim}")
    if isinstance(e, AffineFunc):
        return Polynomial.constant(e.dim, e.coef[j])
    if isinstance(e, (Polynomial, ExpPoly)):
        return e.deriv(j)
    if isinstance(e, Max):
        raise NotSmooth("pointwise maximum is not differentiable")
    if isinstance(e, Sum):
        return _merge_sum([partial_derivative(x, j) for x in e.items])
    if isinstance(e, Scale):
        return scale(e.c, partial_derivative(e.expr, j))
    if isinstance(e, Compose):
        collapsed = expand(e)
        if not isinstance(collapsed, Compose):
            return partial_derivative(collapsed, j)
        parts = []
        for k in range(e.outer.dim):
            douter = e.outer.deriv(k)
            if douter.is_zero():
                continue
            dinner = partial_derivative(e.inner[k], j)
            if _constant_value(dinner) == 0.0:
                continue
            parts.append(multiply(Compose(douter, e.inner), dinner))
        if not parts:
            return Polynomial(e.dim, {})
        return _merge_sum(parts)
    raise TypeError(f"unknown node {type(e).__name__}")


def gradient(e: FunctionExpr):
    return [partial_derivative(e, j) for j in range(e.dim)]


def hessian(e: FunctionExpr):
    grad = gradient(expand(e))
    return [[partial_derivative(g, k) for k in range(e.dim)] for g in grad]


def contains_max(e: FunctionExpr) -> bool:
    if isinstance(e, Max):
        return True
    if isinstance(e, Sum):
        return any(contains_max(x) for x in e.items)
    if isinstance(e, Scale):
        return contains_max(e.expr)
    if isinstance(e, Compose):
        return any(contains_max(x) for x in e.inner)
    return False


def sup_norm_on_grid(e: FunctionExpr, grid) -> float:
    """``max |e|`` over the grid points; a lower estimate of the true sup-norm."""
    from .errors import EmptyGrid

    pts = getattr(grid, "points", grid)
    pts = np.asarray(pts, dtype=float)
    if pts.size == 0:
        raise EmptyGrid("sup-norm over an empty grid")
    return float(np.max(np.abs(e.evaluate(pts))))


# ---------------------------------------------------------------------------
# JSON


def _terms_from_json(obj) -> Dict[MultiIndex, float]:
    terms: Dict[MultiIndex, float] = {}
    for alpha, c in obj["terms"]:
        if any(not isinstance(a, int) or isinstance(a, bool) for a in alpha):
            raise ValueError(f"multi-index entries must be integers, got {alpha}")
        key = tuple(alpha)
        terms[key] = terms.get(key, 0.0) + float(c)
    return terms


def expr_from_json(obj: dict) -> FunctionExpr:
    kind = obj.get("type")
    if kind == "affine":
        return AffineFunc(tuple(obj["coef"]), obj.get("offset", 0.0))
    if kind == "poly":
        return Polynomial(int(obj["dim"]), _terms_from_json(obj))
    if kind == "exp":
        return ExpPoly(int(obj["dim"]), _terms_from_json(obj))
    if kind == "max":
        return Max(tuple(expr_from_json(x) for x in obj["items"]))
    if kind == "sum":
        return Sum(tuple(expr_from_json(x) for x in obj["items"]))
    if kind == "scale":
        return Scale(obj["c"], expr_from_json(obj["expr"]))
    if kind == "compose":
        outer = expr_from_json(obj["outer"])
        if not isinstance(outer, Polynomial):
            raise ValueError("compose outer must be a polynomial")
        return Compose(outer, tuple(expr_from_json(x) for x in obj["inner"]))
    raise ValueError(f"unknown expression type {kind!r}")


def exponents_nonneg_integral(e: FunctionExpr) -> bool:
    """Exact check that every ExpPoly leaf has exponents in Z_+^d."""
    if isinstance(e, ExpPoly):
        return all(isinstance(a, int) and a >= 0 for alpha in e.terms for a in alpha)
    if isinstance(e, (Sum, Max)):
        return all(exponents_nonneg_integral(x) for x in e.items)
    if isinstance(e, Scale):
        return exponents_nonneg_integral(e.expr)
    if isinstance(e, Compose):
        return all(exponents_nonneg_integral(x) for x in e.inner)
    return True

