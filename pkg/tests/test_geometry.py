import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from convexalg.errors import DimensionMismatch, OriginNotInterior, UnboundedBody
from convexalg.geometry import (
    Ball,
    Box,
    Polytope,
    body_from_json,
    bounding_box,
    chord,
    contains,
    distance,
    fattened_contains,
    make_grid,
    simplex_body,
)

UNIT_SQUARE = Box((0.0, 0.0), (1.0, 1.0))
DISK = Ball((0.0, 0.0), 1.0)


def test_contains_examples():
    assert contains(UNIT_SQUARE, (0.5, 0.5))
    assert contains(DISK, (0.0, 1.0))
    assert not contains(UNIT_SQUARE, (1.5, 0.0))


def test_contains_tolerance_and_dimension():
    assert contains(UNIT_SQUARE, (1.05, 0.5), tol=0.1)
    with pytest.raises(DimensionMismatch):
        contains(UNIT_SQUARE, (0.5,))


def test_distance_examples():
    assert distance(UNIT_SQUARE, (2.0, 0.5)) == pytest.approx(1.0)
    assert distance(DISK, (0.0, 0.0)) == 0.0
    assert distance(UNIT_SQUARE, (2.0, 2.0)) == pytest.approx(math.sqrt(2))


def test_polytope_distance_matches_qp_oracle(rng):
    # brute-force oracle: dense sampling of the simplex boundary and interior
    P = simplex_body(2)
    s = np.linspace(0, 1, 801)
    U, V = np.meshgrid(s, s)
    mask = U + V <= 1
    pts = np.column_stack([U[mask], V[mask]])
    for x in rng.uniform(-2, 3, size=(20, 2)):
        oracle = np.min(np.linalg.norm(pts - x, axis=1))
        assert distance(P, x) == pytest.approx(oracle, abs=2e-3)
    assert distance(P, (1.0, 1.0)) == pytest.approx(math.sqrt(0.5), abs=1e-10)


def test_fattened_contains():
    assert fattened_contains(UNIT_SQUARE, (1.9, 0.5))
    assert not fattened_contains(DISK, (2.1, 0.0))
    assert fattened_contains(DISK, (0.2, -0.3))


def test_bounding_box_examples():
    b = bounding_box(UNIT_SQUARE, 1.0)
    assert b.lo == (-1.0, -1.0) and b.hi == (2.0, 2.0)
    b = bounding_box(DISK, 0.0)
    assert b.lo == (-1.0, -1.0) and b.hi == (1.0, 1.0)


def test_polytope_bounding_box_matches_lp_oracle():
    P = simplex_body(2)
    A = np.array(P.normals)
    bvec = np.array(P.offsets)
    lo, hi = [], []
    for j in range(2):
        c = np.zeros(2)
        c[j] = 1.0
        lo.append(linprog(c, A_ub=A, b_ub=bvec, bounds=[(None, None)] * 2).fun)
        hi.append(-linprog(-c, A_ub=A, b_ub=bvec, bounds=[(None, None)] * 2).fun)
    box = bounding_box(P, 1.0)
    np.testing.assert_allclose(box.lo, np.array(lo) - 1, atol=1e-9)
    np.testing.assert_allclose(box.hi, np.array(hi) + 1, atol=1e-9)
    np.testing.assert_allclose(box.lo, [-1, -1], atol=1e-9)
    np.testing.assert_allclose(box.hi, [2, 2], atol=1e-9)


def test_unbounded_polytope_rejected():
    with pytest.raises(UnboundedBody):
        Polytope(((-1.0, 0.0), (0.0, -1.0)), (0.0, 0.0)).bounds()


def test_chord_examples():
    ch = chord(DISK, (0.6, 0.8))
    assert ch.t_min == pytest.approx(-1, abs=1e-9) and ch.t_max == pytest.approx(1, abs=1e-9)
    ch = chord(Box((-1.0, -1.0), (1.0, 1.0)), (1.0, 1.0))
    assert ch.t_min == pytest.approx(-math.sqrt(2), abs=1e-9)
    assert ch.t_max == pytest.approx(math.sqrt(2), abs=1e-9)
    ch = chord(Box((-1.0, -1.0), (2.0, 1.0)), (1.0, 0.0))
    assert (ch.t_min, ch.t_max) == (pytest.approx(-1, abs=1e-9), pytest.approx(2, abs=1e-9))


def test_chord_needs_interior_origin():
    with pytest.raises(OriginNotInterior):
        chord(UNIT_SQUARE, (1.0, 0.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.2, 2.0), st.floats(-0.5, 0.5))
def test_chord_endpoint_and_symmetry(theta, r, shift):
    K = Ball((shift * 0.5, 0.0), r + 0.3)
    y = np.array([math.cos(theta), math.sin(theta)])
    tol = 1e-10
    ch = chord(K, y, tol)
    assert ch.t_min < 0 < ch.t_max
    assert contains(K, ch.t_min * y) and contains(K, ch.t_max * y)
    assert not contains(K, (ch.t_min - 2 * tol) * y)
    assert not contains(K, (ch.t_max + 2 * tol) * y)
    rev = chord(K, -y, tol)
    assert rev.t_min == pytest.approx(-ch.t_max, abs=2 * tol)
    assert rev.t_max == pytest.approx(-ch.t_min, abs=2 * tol)


def test_make_grid_examples():
    g = make_grid(Box((0.0,), (1.0,)), 3, seed=1)
    np.testing.assert_allclose(g.lattice[:, 0], [0, 0.5, 1])
    assert len(g) == 6
    g = make_grid(DISK, 2, seed=0)
    assert g.n_lattice == 0 and len(g) == 2
    g = make_grid(simplex_body(2), 2, seed=0)
    assert {tuple(p) for p in g.lattice} == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)}
    for K in (UNIT_SQUARE, DISK, simplex_body(2)):
        g = make_grid(K, 7, seed=3)
        assert np.all(K.contains_batch(g.points, 1e-12))


def test_make_grid_deterministic():
    a = make_grid(DISK, 9, seed=5).points
    b = make_grid(DISK, 9, seed=5).points
    assert np.array_equal(a, b)


def test_make_grid_rejects_bad_resolution():
    with pytest.raises(ValueError):
        make_grid(DISK, 0)


@pytest.mark.parametrize("K", [UNIT_SQUARE, DISK, simplex_body(2), Box((-1.0, -2.0, 0.0), (1.0, 0.5, 3.0))])
def test_distance_membership_consistency(K, rng):
    lo, hi = K.bounds()
    X = rng.uniform(lo - 1.5, hi + 1.5, size=(400, K.dim))
    d = K.distance_batch(X)
    inside = K.contains_batch(X)
    assert np.array_equal(d == 0, inside)
    fat = np.array([fattened_contains(K, x) for x in X])
    assert np.array_equal(fat, d <= 1)
    box = bounding_box(K, 1.0)
    assert np.all(box.contains_batch(X[d <= 1], 1e-12))


def test_body_json_round_trip():
    for K in (UNIT_SQUARE, DISK, simplex_body(3)):
        assert body_from_json(K.to_json()) == K
    with pytest.raises(ValueError):
        body_from_json({"type": "torus"})
