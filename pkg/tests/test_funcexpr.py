import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexalg.errors import DimensionMismatch, EmptyGrid, NotSmooth
from convexalg.funcexpr import (
    AffineFunc,
    Compose,
    ExpPoly,
    Max,
    Polynomial,
    Scale,
    Sum,
    add,
    compose_poly,
    expand,
    expr_from_json,
    exponents_nonneg_integral,
    partial_derivative,
    scale,
    sq_distance,
    sup_norm_on_grid,
)

X2 = Polynomial(1, {(2,): 1.0})
EXP = ExpPoly(1, {(1,): 1.0})


def fd_partial(e, x, j, h=1e-5):
    xp, xm = np.array(x, float), np.array(x, float)
    xp[j] += h
    xm[j] -= h
    return (e(xp) - e(xm)) / (2 * h)


def test_eval_examples():
    assert AffineFunc((1.0, 0.0), 0.0)((3.0, 5.0)) == 3.0
    assert EXP((0.0,)) == 1.0
    assert Max((X2, add(scale(-1, X2), Polynomial.constant(1, 0.5))))((1.0,)) == 1.0


def test_eval_batch_and_dimension_check():
    p = sq_distance([1.0, 2.0])
    np.testing.assert_allclose(p.evaluate(np.array([[1.0, 2.0], [0.0, 0.0]])), [0.0, 5.0])
    with pytest.raises(DimensionMismatch):
        p.evaluate(np.zeros((3, 3)))


def test_partial_derivative_examples():
    p = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})
    assert partial_derivative(p, 0) == Polynomial(2, {(1, 0): 2.0})
    assert partial_derivative(ExpPoly(1, {(2,): 3.0}), 0) == ExpPoly(1, {(2,): 6.0})


def test_compose_derivative_matches_finite_differences(rng):
    e = Compose(Polynomial(1, {(2,): 1.0}), (EXP,))
    de = partial_derivative(e, 0)
    for x in rng.uniform(-2, 2, 10):
        assert de((x,)) == pytest.approx(2 * math.exp(2 * x), rel=1e-12)
        assert de((x,)) == pytest.approx(fd_partial(e, (x,), 0), rel=1e-6)


def test_derivative_through_max_rejected():
    with pytest.raises(NotSmooth):
        partial_derivative(Max((X2, EXP)), 0)


def test_compose_poly_examples():
    u = Polynomial(1, {(1,): 1.0})
    assert compose_poly(u, [EXP]) == EXP
    assert compose_poly(Polynomial(1, {(2,): 1.0}), [EXP]) == ExpPoly(1, {(2,): 1.0})
    uv = Polynomial(2, {(1, 1): 1.0})
    ex, ey = ExpPoly(2, {(1, 0): 1.0}), ExpPoly(2, {(0, 1): 1.0})
    assert compose_poly(uv, [ex, ey]) == ExpPoly(2, {(1, 1): 1.0})


def test_add_scale_examples():
    x = Polynomial.variable(1, 0)
    z = add(x, scale(-1, x))
    assert isinstance(z, Polynomial) and z.is_zero()
    assert scale(2, EXP) == ExpPoly(1, {(1,): 2.0})
    s = add(X2, EXP)
    assert isinstance(s, Sum)
    assert s((0.7,)) == pytest.approx(0.49 + math.exp(0.7))


def test_operators_route_to_algebra():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    e = (x + y) * (x - y)
    assert e((3.0, 2.0)) == pytest.approx(5.0)
    assert (-x)((2.0, 0.0)) == -2.0


def test_sup_norm_examples():
    x = Polynomial.variable(1, 0)
    grid = np.array([[0.0], [0.5], [1.0]])
    assert sup_norm_on_grid(x, grid) == 1.0
    assert sup_norm_on_grid(Polynomial.constant(1, 3.0), grid) == 3.0
    fine = np.linspace(0, 1, 1001)[:, None]
    assert sup_norm_on_grid(add(X2, scale(-1, x)), fine) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(EmptyGrid):
        sup_norm_on_grid(x, np.zeros((0, 1)))


def test_max_of_same_is_exact(rng):
    e = add(ExpPoly(2, {(1, 0): 0.3, (0, 2): -1.1}), sq_distance([0.2, -0.4]))
    X = rng.uniform(-1, 1, (50, 2))
    assert np.array_equal(Max((e, e)).evaluate(X), e.evaluate(X))


def test_large_exponent_log_domain():
    # e^{750} alone overflows; the tiny coefficient brings the value back in range
    e = ExpPoly(1, {(3,): 1e-300, (0,): -1.0})
    v = e((250.0,))
    assert math.isfinite(v) and v == pytest.approx(math.exp(750.0 - 300 * math.log(10)), rel=1e-10)


def random_exppoly(rng, d, n_terms=3, max_exp=2):
    terms = {}
    for _ in range(n_terms):
        alpha = tuple(int(a) for a in rng.integers(0, max_exp + 1, d))
        terms[alpha] = terms.get(alpha, 0.0) + float(rng.normal())
    return ExpPoly(d, terms)


def random_poly(rng, m, deg=2):
    terms = {}
    for _ in range(4):
        alpha = tuple(int(a) for a in rng.integers(0, deg + 1, m))
        if sum(alpha) <= deg:
            terms[alpha] = float(rng.normal())
    return Polynomial(m, terms)


def test_compose_equals_pointwise_composition(rng):
    for _ in range(20):
        d, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        inner = [random_exppoly(rng, d) for _ in range(m)]
        outer = random_poly(rng, m)
        comp = compose_poly(outer, inner)
        X = rng.uniform(-1, 1, (100, d))
        inner_vals = np.column_stack([h.evaluate(X) for h in inner])
        ref = outer.evaluate(inner_vals)
        scale_ = 1 + np.abs(ref) + np.max(np.abs(inner_vals), axis=1) ** 2
        assert np.all(np.abs(comp.evaluate(X) - ref) <= 1e-9 * scale_)
        assert exponents_nonneg_integral(comp)


@st.composite
def smooth_expr(draw):
    d = 2
    coeffs = draw(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
    p = Polynomial(d, {(2, 0): coeffs[0], (1, 1): coeffs[1], (0, 3): coeffs[2], (0, 0): 1.0})
    e = ExpPoly(d, {(1, 0): coeffs[3], (0, 1): 0.5})
    kind = draw(st.sampled_from(["sum", "scale", "compose", "product"]))
    if kind == "sum":
        return Sum((p, e))
    if kind == "scale":
        return Scale(coeffs[0] + 3.0, add(p, e))
    if kind == "compose":
        return Compose(Polynomial(2, {(2, 0): 1.0, (1, 1): -0.5, (0, 1): 1.0}), (e, p))
    return e * p


@settings(max_examples=60, deadline=None)
@given(smooth_expr(), st.tuples(st.floats(-1, 1), st.floats(-1, 1)), st.integers(0, 1))
def test_partial_derivative_matches_central_differences(e, x, j):
    exact = partial_derivative(e, j)(x)
    approx = fd_partial(e, x, j)
    assert abs(exact - approx) <= 1e-5 * (1 + abs(exact))


def test_json_round_trip_exact_exponents():
    exprs = [
        AffineFunc((1.0, -2.0), 0.5),
        sq_distance([0.3, 0.1]),
        ExpPoly(2, {(3, 0): 1.5, (0, 7): -0.25}),
        Max((AffineFunc((1.0,), 0.0), AffineFunc((-1.0,), 0.0))),
        Sum((X2, EXP)),
        Scale(2.5, EXP),
        Compose(Polynomial(1, {(2,): 1.0}), (EXP,)),
    ]
    for e in exprs:
        back = expr_from_json(json.loads(json.dumps(e.to_json())))
        assert back.to_json() == e.to_json()
    back = expr_from_json({"type": "exp", "dim": 1, "terms": [[[4], 1.0]]})
    assert list(back.terms) == [(4,)] and isinstance(next(iter(back.terms))[0], int)


def test_json_rejects_fractional_exponents():
    with pytest.raises(ValueError):
        expr_from_json({"type": "exp", "dim": 1, "terms": [[[0.5], 1.0]]})
    with pytest.raises(ValueError):
        ExpPoly(1, {(-1,): 1.0})


def test_expand_collapses_to_leaf():
    e = Sum((Scale(2.0, Compose(Polynomial(1, {(2,): 1.0}), (EXP,))), ExpPoly.constant(1, 1.0)))
    leaf = expand(e)
    assert leaf == ExpPoly(1, {(2,): 2.0, (0,): 1.0})
