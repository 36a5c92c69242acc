"""Discrete complex minimax solver against an independent SOCP formulation."""

import numpy as np
import pytest

from exq.minimax import solve_minimax

cp = pytest.importorskip("cvxpy")


def socp_reference(A, f):
    x = cp.Variable(A.shape[1], complex=True)
    t = cp.Variable()
    prob = cp.Problem(cp.Minimize(t), [cp.abs(f - A @ x) <= t])
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_socp_on_random_problems(seed):
    rng = np.random.default_rng(seed)
    m, k = 120, 6
    A = rng.normal(size=(m, k)) + 1j * rng.normal(size=(m, k))
    f = rng.normal(size=m) + 1j * rng.normal(size=m)
    res = solve_minimax(A, f)
    ref = socp_reference(A, f)
    assert res.norm == pytest.approx(ref, rel=1e-6)
    assert np.max(np.abs(f - A @ res.x)) == pytest.approx(res.norm, rel=1e-12)


def test_conj_z_on_circle_has_norm_radius():
    # conj(z) on |z| = R is R^2 / z; the best polynomial approximation is 0 with error R
    t = 2 * np.pi * np.arange(256) / 256
    z = 1.5 * np.exp(1j * t)
    A = np.stack([(z / 1.5) ** j for j in range(6)], axis=1)
    res = solve_minimax(A, np.conj(z))
    assert res.norm == pytest.approx(1.5, rel=1e-9)


def test_exact_fit_has_zero_norm():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(40, 3)) + 0j
    x = np.array([1.0, -2.0, 0.5j])
    res = solve_minimax(A, A @ x)
    assert res.norm < 1e-8
