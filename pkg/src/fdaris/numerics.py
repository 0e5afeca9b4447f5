"""Reusable numeric building blocks for the alternating optimizer.

Contains the single-constraint QCQP dual solver, a generalized
Rayleigh-quotient maximizer, the quadratic majorizer of a sinusoid and a
scalar quadratic minimizer over a quadratically constrained interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class Infeasible(Exception):
    """The constraint set of a subproblem is (numerically) empty."""


class IllConditioned(Exception):
    """A linear system or matrix pencil is too ill conditioned to solve."""


@dataclass(frozen=True)
class Qcqp1Problem:
    """min_x x^H A x - 2 Re{b^H x}  s.t.  x^H P x + r <= 0.

    A is Hermitian PSD, P Hermitian (possibly indefinite), r real.
    """

    a_mat: np.ndarray
    b_vec: np.ndarray
    p_mat: np.ndarray
    r_const: float

    def __post_init__(self):
        a = np.asarray(self.a_mat, dtype=complex)
        p = np.asarray(self.p_mat, dtype=complex)
        b = np.asarray(self.b_vec, dtype=complex)
        n = b.shape[0]
        if a.shape != (n, n) or p.shape != (n, n):
            raise ValueError("inconsistent QCQP dimensions")
        scale = np.linalg.norm(a)
        if scale > 0.0:
            lo = float(scipy.linalg.eigvalsh(a, subset_by_index=(0, 0))[0])
            if lo < -1e-9 * scale:
                raise ValueError("objective quadratic must be PSD")


def _pinv_solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pseudo-inverse solve via eigendecomposition with relative cutoff."""
    vals, vecs = np.linalg.eigh(m)
    cutoff = 1e-12 * np.max(np.abs(vals)) if vals.size else 0.0
    if np.all(np.abs(vals) <= cutoff):
        raise IllConditioned("matrix numerically zero")
    inv = np.where(np.abs(vals) > cutoff, 1.0 / np.where(vals == 0, 1.0, vals), 0.0)
    return vecs @ (inv * (vecs.conj().T @ b))


def solve_qcqp1(p: Qcqp1Problem, tol: float = 1e-8,
                mu_max_init: float = 1.0):
    """Solve the QCQP-1 via its one-dimensional Lagrangian dual.

    Returns (x, mu) with x = (A + mu P)^+ b, mu >= 0 chosen so that the
    constraint is satisfied within ``tol * |r| + tol`` and complementary
    slackness holds. Raises Infeasible when no dual value in the bracket
    satisfies the constraint, IllConditioned when the regularized systems
    cannot be solved.
    """
    a = np.asarray(p.a_mat, dtype=complex)
    b = np.asarray(p.b_vec, dtype=complex)
    pm = np.asarray(p.p_mat, dtype=complex)
    r = float(p.r_const)
    thresh = tol * abs(r) + tol

    # Fast path: A positive definite. One Cholesky plus one dense
    # eigendecomposition give the whole dual curve in closed form.
    try:
        low = scipy.linalg.cholesky(a, lower=True)
    except scipy.linalg.LinAlgError:
        low = None

    if low is not None:
        linv_b = scipy.linalg.solve_triangular(low, b, lower=True)
        p_t = scipy.linalg.solve_triangular(low, pm, lower=True)
        p_t = scipy.linalg.solve_triangular(low, p_t.conj().T, lower=True).conj().T
        p_t = 0.5 * (p_t + p_t.conj().T)
        d, v = np.linalg.eigh(p_t)
        y2 = np.abs(v.conj().T @ linv_b) ** 2

        def x_of(mu):
            z = (v.conj().T @ linv_b) / (1.0 + mu * d)
            return scipy.linalg.solve_triangular(low, v @ z, lower=True,
                                                 trans="C")

        def g(mu):
            return float(np.sum(d * y2 / (1.0 + mu * d) ** 2)) + r

        if g(0.0) <= thresh:
            return x_of(0.0), 0.0
        d_min = float(np.min(d))
        if d_min >= 0.0:
            raise Infeasible("constraint cannot be activated by the dual")
        mu_bar = -1.0 / d_min
        hi = min(mu_max_init, 0.5 * mu_bar)
        for _ in range(200):
            if g(hi) <= 0.0:
                break
            hi = 0.5 * (hi + mu_bar)
        else:
            raise Infeasible("no feasible dual value found in the bracket")
        lo_mu = 0.0
        for _ in range(200):
            mid = 0.5 * (lo_mu + hi)
            if g(mid) <= 0.0:
                hi = mid
            else:
                lo_mu = mid
            if g(lo_mu) <= thresh or hi - lo_mu <= 1e-15 * max(hi, 1.0):
                break
        mu = lo_mu if g(lo_mu) <= thresh else hi
        return x_of(mu), mu

    # Slow path: A singular. Solve each dual system by regularized
    # pseudo-inverse and bisect the same constraint curve.
    def x_of(mu):
        return _pinv_solve(a + mu * pm, b)

    def g(mu):
        x = x_of(mu)
        return float(np.real(x.conj() @ pm @ x)) + r

    if g(0.0) <= thresh:
        return x_of(0.0), 0.0
    hi = mu_max_init
    for _ in range(200):
        if g(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise Infeasible("no feasible dual value found in the bracket")
    lo_mu = 0.0
    for _ in range(120):
        mid = 0.5 * (lo_mu + hi)
        if g(mid) <= 0.0:
            hi = mid
        else:
            lo_mu = mid
    mu = lo_mu if g(lo_mu) <= thresh else hi
    return x_of(mu), mu


def generalized_max_eigvec(a_mat: np.ndarray, b_mat: np.ndarray) -> np.ndarray:
    """Unit vector maximizing v^H A v / v^H B v for Hermitian A, B > 0."""
    a = 0.5 * (np.asarray(a_mat, dtype=complex)
               + np.asarray(a_mat, dtype=complex).conj().T)
    b = 0.5 * (np.asarray(b_mat, dtype=complex)
               + np.asarray(b_mat, dtype=complex).conj().T)
    try:
        scipy.linalg.cholesky(b)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditioned("pencil denominator not positive definite") from exc
    _, vecs = scipy.linalg.eigh(a, b)
    v = vecs[:, -1]
    return v / np.linalg.norm(v)


def cos_quadratic_majorizer(xi: float, eta: float, rho: float, x0: float):
    """Quadratic upper bound of g(x) = xi * cos(eta x + rho), tight at x0.

    Returns (a2, x_c, c0) with ghat(x) = a2 (x - x_c)^2 + c0 satisfying
    ghat(x0) = g(x0), ghat'(x0) = g'(x0) and ghat >= g everywhere. The
    curvature a2 = |xi| eta^2 / 2 dominates |g''| globally.
    """
    if xi == 0.0:
        return 0.0, x0, 0.0
    if eta == 0.0:
        return 0.0, x0, xi * np.cos(rho)
    a2 = 0.5 * abs(xi) * eta * eta
    g0 = xi * np.cos(eta * x0 + rho)
    g1 = -xi * eta * np.sin(eta * x0 + rho)
    x_c = x0 - g1 / (2.0 * a2)
    c0 = g0 - a2 * (x0 - x_c) ** 2
    return a2, x_c, c0


def _quad_min_on_interval(a: float, b: float, lo: float, hi: float) -> float:
    """Argmin of a x^2 + b x over [lo, hi] for a >= 0."""
    if a > 0.0:
        return float(np.clip(-b / (2.0 * a), lo, hi))
    if b > 0.0:
        return lo
    if b < 0.0:
        return hi
    return lo


def min_quadratic_on_constrained_interval(obj, cons, lo: float, hi: float,
                                          x_cur: float,
                                          tol: float = 1e-9) -> float:
    """Minimize a convex quadratic over a quadratically cut interval.

    obj = (a, b, c) encodes a x^2 + b x + c with a >= 0; cons = (a', b', c')
    encodes the constraint a' x^2 + b' x + c' <= 0. Returns the feasible
    minimizer in [lo, hi]; falls back to x_cur when the feasible set is
    numerically empty.
    """
    a, b, c = (float(t) for t in obj)
    ap, bp, cp = (float(t) for t in cons)
    span = max(abs(lo), abs(hi), 1.0)
    obj_scale = max(abs(a) * span * span, abs(b) * span, abs(c))
    if a < -tol * max(obj_scale, 1.0) / (span * span):
        raise ValueError("objective quadratic must be convex")
    # Degeneracy tests are relative to the constraint's own magnitude so
    # that arbitrarily scaled problems classify identically.
    cons_scale = max(abs(ap) * span * span, abs(bp) * span, abs(cp))
    czero = tol * cons_scale

    # Feasible set of the quadratic cut as a union of closed intervals.
    if abs(ap) * span * span <= czero:
        if abs(bp) * span <= czero:
            pieces = [(lo, hi)] if cp <= czero else []
        elif bp > 0.0:
            pieces = [(lo, min(hi, -cp / bp))]
        else:
            pieces = [(max(lo, -cp / bp), hi)]
    else:
        disc = bp * bp - 4.0 * ap * cp
        if disc < 0.0:
            pieces = [] if ap > 0.0 else [(lo, hi)]
        else:
            root = np.sqrt(disc)
            r1 = (-bp - root) / (2.0 * ap)
            r2 = (-bp + root) / (2.0 * ap)
            r1, r2 = min(r1, r2), max(r1, r2)
            if ap > 0.0:
                pieces = [(max(lo, r1), min(hi, r2))]
            else:
                pieces = [(lo, min(hi, r1)), (max(lo, r2), hi)]
    pieces = [(p, q) for p, q in pieces if p <= q]
    if not pieces:
        return x_cur

    best_x, best_val = None, np.inf
    for p, q in pieces:
        x = _quad_min_on_interval(a, b, p, q)
        val = a * x * x + b * x + c
        if val < best_val:
            best_x, best_val = x, val
    return float(best_x)
