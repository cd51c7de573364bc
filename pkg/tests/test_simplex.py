import numpy as np
import pytest
from scipy.optimize import linprog

from convexalg.errors import Infeasible, Unbounded
from convexalg.simplex import linprog_max


def test_textbook_problem():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
    res = linprog_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-10)
    assert res.value == pytest.approx(36)


def test_equality_and_negative_rhs():
    # max x + y, x + y = 1, -x <= -0.25  (x >= 0.25)
    res = linprog_max([1, 1], [[-1, 0]], [-0.25], [[1, 1]], [1])
    assert res.value == pytest.approx(1)
    assert res.x[0] >= 0.25 - 1e-12


def test_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        linprog_max([1, 0], [[1, 0]], [-1])
    with pytest.raises(Unbounded):
        linprog_max([1, 1], [[1, -1]], [1])


def test_random_problems_match_scipy(rng):
    for _ in range(60):
        n, m = int(rng.integers(2, 6)), int(rng.integers(2, 9))
        A = rng.normal(size=(m, n))
        b = rng.uniform(-1, 3, m)
        c = rng.normal(size=n)
        A = np.vstack([A, np.ones((1, n))])
        b = np.append(b, 10.0)
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        if ref.status == 2:
            with pytest.raises(Infeasible):
                linprog_max(c, A, b)
            continue
        assert ref.status == 0
        res = linprog_max(c, A, b)
        assert res.value == pytest.approx(-ref.fun, abs=1e-8)
        assert np.all(A @ res.x <= b + 1e-8) and np.all(res.x >= -1e-12)


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the textbook rule; Bland's rule must finish
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    b = [0, 0, 1]
    res = linprog_max(c, A, b)
    assert res.value == pytest.approx(0.05)
