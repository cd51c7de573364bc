import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexalg.convexity import convexity_1d_test, midpoint_convexity_test
from convexalg.errors import DegreeCapExceeded, InputNotConvex, OutOfRange
from convexalg.funcexpr import Compose, ExpPoly, Polynomial, exponents_nonneg_integral
from convexalg.geometry import Box
from convexalg.univariate import (
    MonotoneGenerator,
    bernstein_1d,
    bernstein_approx,
    chebyshev_interpolant,
    chebyshev_to_power,
    exp_generator,
    exp_sg_approx,
    inverse_eval,
    prop3_pipeline,
    q_derivatives,
    regularize,
)

X = Polynomial.from_coeffs_1d([0.0, 1.0])
XX = Polynomial.from_coeffs_1d([0.0, 0.0, 1.0])
IDENTITY_01 = MonotoneGenerator.certify(X, 0.0, 1.0)


def test_regularize_examples(rng):
    assert regularize(X, 0.2) == Polynomial.from_coeffs_1d([0.0, 1.0, 0.1])
    assert regularize(Polynomial(1, {}), 1.0) == Polynomial.from_coeffs_1d([0.0, 0.0, 0.5])
    p = Polynomial.from_coeffs_1d([1.0, -2.0, 0.3, 0.7])
    pd = regularize(p, 0.37)
    d2 = lambda q: q.deriv(0).deriv(0)
    for t in rng.uniform(-3, 3, 5):
        assert d2(pd)((t,)) - d2(p)((t,)) == pytest.approx(0.37, abs=1e-12)
    with pytest.raises(ValueError):
        regularize(X, 0.0)


def test_inverse_eval_examples():
    gen = exp_generator(-1.0, 1.0)
    assert inverse_eval(gen, 1.0) == pytest.approx(0.0, abs=1e-13)
    assert inverse_eval(IDENTITY_01, 0.7) == pytest.approx(0.7, abs=1e-13)
    assert inverse_eval(gen, 2.0) == pytest.approx(math.log(2.0), abs=1e-13)
    with pytest.raises(OutOfRange):
        inverse_eval(gen, 3.0)


def test_generator_certification():
    assert exp_generator(-1.0, 1.0).hprime_min == pytest.approx(math.exp(-1.0))
    with pytest.raises(ValueError):
        MonotoneGenerator.certify(XX, -1.0, 1.0)


def test_q_derivatives_examples():
    half_sq = Polynomial.from_coeffs_1d([0.0, 0.0, 0.5])
    q = q_derivatives(half_sq, IDENTITY_01, 0.3)
    assert q[2] == pytest.approx(1.0)
    gen = exp_generator(-1.0, 1.0)
    q0, q1, q2 = q_derivatives(half_sq, gen, 1.0)
    assert q0 == pytest.approx(0.0, abs=1e-20) and q1 == pytest.approx(0.0, abs=1e-13)
    assert q2 == pytest.approx(1.0, abs=1e-12)
    h = 1e-4
    fd = (q_derivatives(half_sq, gen, 1 + h)[0] - 2 * q0 + q_derivatives(half_sq, gen, 1 - h)[0]) / h ** 2
    assert fd == pytest.approx(q2, abs=1e-6)
    for u in (0.5, 1.7, 2.5):
        ref = (1 - math.log(u)) / u ** 2
        assert q_derivatives(half_sq, gen, u)[2] == pytest.approx(ref, rel=1e-10)


def test_chebyshev_to_power_exact_on_monomials():
    from numpy.polynomial import chebyshev as C

    # T_3 on [-1, 1] is 4u^3 - 3u
    np.testing.assert_allclose(chebyshev_to_power(np.array([0, 0, 0, 1.0]), -1.0, 1.0), [0, -3, 0, 4], atol=1e-15)
    coef = np.array([0.3, -1.2, 0.5, 0.25])
    power = chebyshev_to_power(coef, 0.5, 2.0)
    us = np.linspace(0.5, 2.0, 11)
    ref = C.Chebyshev(coef, domain=[0.5, 2.0])(us)
    np.testing.assert_allclose(np.polynomial.polynomial.polyval(us, power), ref, atol=1e-13)


def test_prop3_identity_generator_reproduces_regularized_polynomial():
    gen = MonotoneGenerator.certify(X, -1.0, 1.0)
    rep = prop3_pipeline(XX, gen, 0.05)
    assert rep.passed
    delta = 0.05 / 2
    np.testing.assert_allclose(rep.power_coefficients[:3], [0.0, 0.0, 1 + delta / 2], atol=1e-12)
    np.testing.assert_allclose(rep.power_coefficients[3:], 0.0, atol=1e-12)
    assert rep.error_estimate == pytest.approx(delta / 2, abs=1e-12)


@pytest.mark.parametrize("p", [X, XX], ids=["x", "x2"])
def test_prop3_exponential_generator(p):
    gen = exp_generator(-1.0, 1.0)
    rep = prop3_pipeline(p, gen, 0.05)
    assert rep.passed and rep.degree <= 256
    assert isinstance(rep.output, Compose)
    xs = np.linspace(-1, 1, 10000)
    assert np.max(np.abs(rep.output.evaluate(xs[:, None]) - p.evaluate(xs[:, None]))) <= 0.05
    assert rep.second_derivative_min >= 0.1 * rep.delta
    leaf = rep.expanded()
    assert isinstance(leaf, ExpPoly) and exponents_nonneg_integral(leaf)


def test_prop3_on_unit_interval():
    rep = prop3_pipeline(XX, exp_generator(0.0, 1.0), 0.01)
    assert rep.passed and rep.second_derivative_min > 0
    xs = np.linspace(0, 1, 10000)
    assert np.max(np.abs(rep.output.evaluate(xs[:, None]) - xs ** 2)) <= 0.01


def test_prop3_rejects_nonconvex_input():
    with pytest.raises(InputNotConvex):
        prop3_pipeline(Polynomial.from_coeffs_1d([0, 0, 0, 1.0]), exp_generator(-1.0, 1.0), 0.05)


def test_prop3_reports_degree_cap():
    with pytest.raises(DegreeCapExceeded) as info:
        prop3_pipeline(XX, exp_generator(-1.0, 1.0), 0.05, n_cap=8)
    assert info.value.best["value_error"] > 0


@pytest.mark.parametrize("p", [X, XX], ids=["x", "x2"])
def test_chebyshev_derivative_errors_decrease(p):
    gen = exp_generator(-1.0, 1.0)
    pd = regularize(p, 0.025)
    us = np.linspace(*gen.range, 400)
    Q = np.array([q_derivatives(pd, gen, u) for u in us])
    prev = [math.inf] * 3
    for n in (4, 8, 16, 32):
        c = chebyshev_interpolant(pd, gen, n)
        errs = [float(np.max(np.abs(c.deriv(j)(us) - Q[:, j]))) if j else float(np.max(np.abs(c(us) - Q[:, 0])))
                for j in range(3)]
        assert all(e < pv for e, pv in zip(errs, prev))
        prev = errs


def test_bernstein_examples():
    b = bernstein_1d([0.0, 0.5, 1.0])
    assert b == Polynomial.from_coeffs_1d([0.0, 1.0])
    b = bernstein_approx(lambda t: t * t, 0.0, 1.0, 2)
    np.testing.assert_allclose(b.coeffs_1d(), [0.0, 0.5, 0.5], atol=1e-12)
    c = bernstein_approx(lambda t: 3.25, -2.0, 5.0, 6)
    assert c == Polynomial.constant(1, 3.25)
    lin = bernstein_approx(lambda t: t, -1.0, 3.0, 5)
    np.testing.assert_allclose(lin.coeffs_1d()[:2], [0.0, 1.0], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=2, max_size=14), st.floats(-3, 3), st.floats(-2, 2))
def test_bernstein_preserves_convexity(second_diffs, v0, slope):
    # build samples with nonnegative second differences
    vals = [v0, v0 + slope]
    for s in second_diffs:
        vals.append(2 * vals[-1] - vals[-2] + s)
    b = bernstein_1d(vals)
    cert = convexity_1d_test(lambda t: b.evaluate(t[:, None]), 0.0, 1.0, n=65, n_pairs=128, rel_tol=1e-10)
    assert cert.passed


def test_exp_sg_approx_one_dimension():
    eps = 0.05
    gens = exp_sg_approx(1, 1.0, eps)
    xs = np.linspace(-1, 1, 2001)[:, None]
    assert np.max(np.abs(gens[0].evaluate(xs) - xs[:, 0])) <= eps
    assert np.max(np.abs(gens[1].evaluate(xs) + xs[:, 0])) <= eps


def test_exp_sg_approx_structure():
    d, eps = 2, 0.1
    gens = exp_sg_approx(d, 1.0, eps)
    assert abs(gens[d](np.zeros(d))) <= eps
    K = Box((-1.0, -1.0), (1.0, 1.0))
    for j, h in enumerate(gens):
        assert exponents_nonneg_integral(h)
        assert midpoint_convexity_test(h, K, n_pairs=300).passed
        if j < d:
            assert all(alpha[k] == 0 for alpha in h.terms for k in range(d) if k != j)
    with pytest.raises(ValueError):
        exp_sg_approx(2, 5.0, eps)
