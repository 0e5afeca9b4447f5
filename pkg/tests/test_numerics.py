"""Unit tests for the numeric building blocks."""

import numpy as np
import pytest

from fdaris.numerics import (Infeasible, Qcqp1Problem,
                             cos_quadratic_majorizer, generalized_max_eigvec,
                             min_quadratic_on_constrained_interval,
                             solve_qcqp1)


def _random_psd(rng, n, rank=None):
    g = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal(
        (n, rank or n))
    return g @ g.conj().T


def _random_hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (g + g.conj().T)


def test_qcqp_rejects_indefinite_objective():
    rng = np.random.default_rng(0)
    a = _random_hermitian(rng, 4)
    a -= (np.linalg.eigvalsh(a)[0] - 1.0) * np.eye(4)  # min eigenvalue 1
    Qcqp1Problem(a_mat=a, b_vec=np.ones(4, complex),
                 p_mat=np.eye(4), r_const=0.0)
    with pytest.raises(ValueError):
        Qcqp1Problem(a_mat=-np.eye(4), b_vec=np.ones(4, complex),
                     p_mat=np.eye(4), r_const=0.0)


def test_qcqp_unconstrained_when_slack():
    rng = np.random.default_rng(1)
    a = _random_psd(rng, 3) + np.eye(3)
    b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    x_free = np.linalg.solve(a, b)
    slack = float(np.real(x_free.conj() @ x_free)) + 1.0
    prob = Qcqp1Problem(a_mat=a, b_vec=b, p_mat=np.eye(3), r_const=-slack)
    x, mu = solve_qcqp1(prob)
    assert mu == 0.0
    assert np.allclose(x, x_free, rtol=1e-10)


def test_qcqp_activates_constraint():
    rng = np.random.default_rng(2)
    a = _random_psd(rng, 4) + np.eye(4)
    b = 0.05 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    p = _random_hermitian(rng, 4)
    p -= (np.linalg.eigvalsh(p)[-1] + 0.5) * np.eye(4)  # strictly negative
    # r > 0 forces activation since x = 0 is infeasible
    prob = Qcqp1Problem(a_mat=a, b_vec=b, p_mat=p, r_const=0.3)
    x, mu = solve_qcqp1(prob, tol=1e-10)
    val = float(np.real(x.conj() @ p @ x)) + 0.3
    assert mu > 0.0
    assert val <= 1e-8


def test_qcqp_detects_infeasibility():
    # positive definite constraint with positive offset cannot be met
    prob = Qcqp1Problem(a_mat=np.eye(3), b_vec=np.ones(3, complex),
                        p_mat=np.eye(3), r_const=1.0)
    with pytest.raises(Infeasible):
        solve_qcqp1(prob)


def test_qcqp_matches_grid_on_small_instances():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        a = _random_psd(rng, n) + 0.1 * np.eye(n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        p = _random_hermitian(rng, n)
        r = float(rng.uniform(-2.0, 0.5))
        prob = Qcqp1Problem(a_mat=a, b_vec=b, p_mat=p, r_const=r)
        try:
            x, _ = solve_qcqp1(prob, tol=1e-10)
        except Infeasible:
            continue
        obj = float(np.real(x.conj() @ a @ x) - 2 * np.real(b.conj() @ x))
        d_min = float(np.linalg.eigvalsh(
            np.linalg.solve(a, p))[0].real)
        mu_hi = -0.999 / d_min if d_min < 0 else 50.0
        best = np.inf
        for mu in np.linspace(0.0, mu_hi, 4001):
            y = np.linalg.solve(a + mu * p, b)
            if float(np.real(y.conj() @ p @ y)) + r <= 1e-9:
                val = float(np.real(y.conj() @ a @ y)
                            - 2 * np.real(b.conj() @ y))
                best = min(best, val)
        assert obj <= best + 1e-6 * max(abs(best), 1.0)


def test_generalized_max_eigvec_optimality():
    rng = np.random.default_rng(4)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        a = _random_hermitian(rng, n)
        b = _random_psd(rng, n) + np.eye(n)
        v = generalized_max_eigvec(a, b)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        quot = np.real(v.conj() @ a @ v) / np.real(v.conj() @ b @ v)
        for _ in range(50):
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            ref = np.real(z.conj() @ a @ z) / np.real(z.conj() @ b @ z)
            assert quot >= ref - 1e-9 * max(abs(quot), 1.0)


def test_cos_majorizer_tangent_and_dominant():
    rng = np.random.default_rng(5)
    for _ in range(100):
        xi = float(rng.uniform(-3.0, 3.0))
        eta = float(rng.uniform(-5.0, 5.0))
        rho = float(rng.uniform(0.0, 2 * np.pi))
        x0 = float(rng.uniform(-2.0, 2.0))
        a2, xc, c0 = cos_quadratic_majorizer(xi, eta, rho, x0)

        def g(x):
            return xi * np.cos(eta * x + rho)

        def ghat(x):
            return a2 * (x - xc) ** 2 + c0

        assert ghat(x0) == pytest.approx(g(x0), abs=1e-12)
        h = 1e-6
        slope = (ghat(x0 + h) - ghat(x0 - h)) / (2 * h)
        ref_slope = -xi * eta * np.sin(eta * x0 + rho)
        assert slope == pytest.approx(ref_slope, abs=1e-5)
        grid = np.linspace(x0 - 10.0, x0 + 10.0, 400)
        assert np.all(ghat(grid) >= g(grid) - 1e-10)


def test_quadratic_interval_minimizer_basic():
    # unconstrained parabola inside the box
    x = min_quadratic_on_constrained_interval(
        (1.0, -4.0, 0.0), (0.0, 0.0, -1.0), 0.0, 10.0, 5.0)
    assert x == pytest.approx(2.0)
    # clipped at the boundary
    x = min_quadratic_on_constrained_interval(
        (1.0, -40.0, 0.0), (0.0, 0.0, -1.0), 0.0, 10.0, 5.0)
    assert x == pytest.approx(10.0)
    # linear objective picks the feasible end
    x = min_quadratic_on_constrained_interval(
        (0.0, 1.0, 0.0), (0.0, 0.0, -1.0), -3.0, 7.0, 0.0)
    assert x == pytest.approx(-3.0)


def test_quadratic_interval_minimizer_with_cut():
    # constraint x^2 - 1 <= 0 intersects [0, 10] in [0, 1]
    x = min_quadratic_on_constrained_interval(
        (1.0, -4.0, 0.0), (1.0, 0.0, -1.0), 0.0, 10.0, 0.5)
    assert x == pytest.approx(1.0)
    # concave cut -x^2 + 1 <= 0 leaves [1, 10]
    x = min_quadratic_on_constrained_interval(
        (1.0, 0.0, 0.0), (-1.0, 0.0, 1.0), 0.0, 10.0, 2.0)
    assert x == pytest.approx(1.0)
    # empty feasible set falls back to the incumbent
    x = min_quadratic_on_constrained_interval(
        (1.0, 0.0, 0.0), (1.0, 0.0, 1.0), -5.0, 5.0, 1.25)
    assert x == pytest.approx(1.25)


def test_quadratic_interval_minimizer_scale_invariant():
    """Classification must not depend on the absolute coefficient scale."""
    obj = (1.0, -4.0, 0.0)
    for s in (1.0, 1e-26, 1e20):
        cons = (s * 1.0, 0.0, -s * 1.0)
        x = min_quadratic_on_constrained_interval(obj, cons, 0.0, 10.0, 0.5)
        assert x == pytest.approx(1.0), s


def test_quadratic_interval_minimizer_rejects_concave_objective():
    with pytest.raises(ValueError):
        min_quadratic_on_constrained_interval(
            (-1.0, 0.0, 0.0), (0.0, 0.0, -1.0), 0.0, 1.0, 0.5)
