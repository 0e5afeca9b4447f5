"""Alternating optimizer for sum rate under a radar SCNR constraint.

The nonconvex design problem is tackled by a quadratic-transform
reformulation plus block updates: closed-form beamformers through a
single-constraint QCQP dual, closed-form auxiliaries, a generalized
eigenvector equalizer, a symmetric ADMM for the unit-modulus RIS phases
with majorized quartic SCNR surrogates, and coordinate-wise successive
convex approximation for the per-antenna frequency offsets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channels import (CascadedChannels, ChannelSet, FrequencyOffsets,
                       cascade, with_offsets)
from .metrics import IsacDesign, scnr, sum_rate, user_sinr
from .numerics import (Infeasible, Qcqp1Problem, cos_quadratic_majorizer,
                       generalized_max_eigvec,
                       min_quadratic_on_constrained_interval, solve_qcqp1)
from .scenario import C_LIGHT, ScenarioConfig


class ScnrInfeasible(Exception):
    """No design meeting the radar SCNR threshold could be found."""


@dataclass
class FpAuxiliaries:
    """Quadratic-transform auxiliaries: one complex and one weight per user."""

    alpha: np.ndarray   # (K,) complex
    wbar: np.ndarray    # (K,) nonnegative reals


_GOLDEN = 0.5 * (1.0 + np.sqrt(5.0))


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances, stepsizes and iteration budgets of the solver."""

    max_outer_iters: int = 30
    rel_tol: float = 1e-3
    sadmm_mu_pen: float = 1.0
    sadmm_r1: float = 0.9
    sadmm_r2: float = 0.9
    sadmm_max_iters: int = 60
    sadmm_primal_tol: float = 1e-6
    mm_steps: int = 25
    mm_rel_tol: float = 1e-4
    sca_passes: int = 3
    sca_grid: int = 64
    fp_inner_iters: int = 25
    ris_inner_iters: int = 10
    fp_inner_tol: float = 1e-5
    extrap_factors: tuple = (32.0, 16.0, 8.0, 4.0, 2.0)
    qcqp_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        r1, r2 = self.sadmm_r1, self.sadmm_r2
        ok = (-1.0 < r1 < 1.0 and 0.0 < r2 < _GOLDEN and r1 + r2 > 0.0
              and abs(r1) < 1.0 + r2 - r2 * r2)
        if not ok:
            raise ValueError("SADMM stepsizes outside the stability region")
        if self.sadmm_mu_pen <= 0.0:
            raise ValueError("penalty parameter must be positive")
        if self.max_outer_iters < 1 or self.rel_tol <= 0.0:
            raise ValueError("invalid outer-loop settings")


@dataclass
class SolverTrace:
    """Per-outer-iteration progress log."""

    fp_obj: list = field(default_factory=list)
    sum_rate: list = field(default_factory=list)
    scnr: list = field(default_factory=list)
    power: list = field(default_factory=list)
    sadmm_residual: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)

    def append(self, fp_obj, rate, scnr_val, power, residual, wall):
        self.fp_obj.append(fp_obj)
        self.sum_rate.append(rate)
        self.scnr.append(scnr_val)
        self.power.append(power)
        self.sadmm_residual.append(residual)
        self.wall_time.append(wall)

    def __len__(self):
        return len(self.sum_rate)


@dataclass
class SolveResult:
    design: IsacDesign
    trace: SolverTrace
    iters: int
    converged: bool


# --- quadratic-transform objective and closed-form blocks ------------------

def _gain_matrix(w: np.ndarray, casc: CascadedChannels) -> np.ndarray:
    """hw[k, k'] = h_tilde_k^H w_k'."""
    return casc.h_tilde.conj() @ w.T


def fp_objective(w: np.ndarray, aux: FpAuxiliaries, casc: CascadedChannels,
                 noise_w: float) -> float:
    """Quadratic-transform surrogate of the ln-sum-rate (natural log)."""
    hw = _gain_matrix(w, casc)
    total = 0.0
    for k in range(w.shape[0]):
        wb = aux.wbar[k]
        al = aux.alpha[k]
        denom = float(np.sum(np.abs(hw[k]) ** 2)) + noise_w
        total += (np.log1p(wb) - wb
                  + 2.0 * np.sqrt(1.0 + wb) * np.real(np.conj(al) * hw[k, k])
                  - abs(al) ** 2 * denom)
    return float(total)


def update_auxiliaries(w: np.ndarray, casc: CascadedChannels,
                       noise_w: float) -> FpAuxiliaries:
    """Closed-form auxiliary refresh; makes the surrogate tight."""
    hw = _gain_matrix(w, casc)
    k_users = w.shape[0]
    wbar = np.empty(k_users)
    alpha = np.empty(k_users, dtype=complex)
    for k in range(k_users):
        gains = np.abs(hw[k]) ** 2
        interference = float(np.sum(gains) - gains[k]) + noise_w
        wbar[k] = gains[k] / interference
        alpha[k] = (np.sqrt(1.0 + wbar[k]) * hw[k, k]
                    / (float(np.sum(gains)) + noise_w))
    return FpAuxiliaries(alpha=alpha, wbar=wbar)


def update_equalizer(w: np.ndarray, casc: CascadedChannels,
                     cfg: ScenarioConfig) -> np.ndarray:
    """SCNR-optimal receive filter from the generalized eigenproblem."""
    n_rx = casc.h_bt.shape[0]
    num = np.zeros((n_rx, n_rx), dtype=complex)
    for k in range(w.shape[0]):
        v = casc.h_bt @ w[k]
        num += cfg.beta_target * np.outer(v, v.conj())
    den = cfg.noise_radar_watt * np.eye(n_rx, dtype=complex)
    for c in range(casc.h_bc.shape[0]):
        for k in range(w.shape[0]):
            v = casc.h_bc[c] @ w[k]
            den += cfg.beta_clutter * np.outer(v, v.conj())
    return generalized_max_eigvec(num, den)


def _scnr_constraint_matrix(casc: CascadedChannels, u: np.ndarray,
                            cfg: ScenarioConfig, gamma: float) -> np.ndarray:
    """P1 such that sum_k w_k^H P1 w_k <= 0 iff SCNR >= gamma at full power."""
    n_tx = casc.h_bt.shape[1]
    vt = casc.h_bt.conj().T @ u          # (N_t,)
    unorm2 = float(np.real(u.conj() @ u))
    p1 = gamma * (unorm2 * cfg.noise_radar_watt / cfg.p_bs_watt
                  ) * np.eye(n_tx, dtype=complex)
    for c in range(casc.h_bc.shape[0]):
        vc = casc.h_bc[c].conj().T @ u
        p1 += gamma * cfg.beta_clutter * np.outer(vc, vc.conj())
    p1 -= cfg.beta_target * np.outer(vt, vt.conj())
    return 0.5 * (p1 + p1.conj().T)


def update_beamformers(w: np.ndarray, aux: FpAuxiliaries,
                       casc: CascadedChannels, u: np.ndarray,
                       cfg: ScenarioConfig, opts: SolverOptions,
                       gamma: float | None = None) -> np.ndarray:
    """Joint beamformer update through the stacked QCQP-1 dual.

    All users share one dual variable because the SCNR constraint couples
    them; the solution is rescaled to spend the full power budget, which
    makes the homogeneous constraint equivalent to the true SCNR bound.
    Raises ScnrInfeasible when no beamformer block can meet the bound.
    """
    k_users, n_tx = w.shape
    if gamma is None:
        gamma = cfg.gamma_t
    noise = cfg.noise_user_watt
    p_bs = cfg.p_bs_watt

    a0 = (np.sum(np.abs(aux.alpha) ** 2) * noise / p_bs
          ) * np.eye(n_tx, dtype=complex)
    for k in range(k_users):
        h = casc.h_tilde[k]
        a0 += abs(aux.alpha[k]) ** 2 * np.outer(h, h.conj())
    b = np.concatenate([np.sqrt(1.0 + aux.wbar[k]) * aux.alpha[k]
                        * casc.h_tilde[k] for k in range(k_users)])

    p1 = _scnr_constraint_matrix(casc, u, cfg, gamma)
    scale = np.linalg.norm(p1)
    if scale > 0.0:
        p1 = p1 / scale
    eye_k = np.eye(k_users)
    prob = Qcqp1Problem(a_mat=np.kron(eye_k, a0), b_vec=b,
                        p_mat=np.kron(eye_k, p1), r_const=0.0)
    try:
        x, _ = solve_qcqp1(prob, tol=opts.qcqp_tol)
    except Infeasible as exc:
        raise ScnrInfeasible("beamformer subproblem infeasible") from exc
    w_hat = x.reshape(k_users, n_tx)
    norm2 = float(np.sum(np.abs(w_hat) ** 2))
    if norm2 <= 1e-30:
        return w
    return np.sqrt(p_bs / norm2) * w_hat


# --- RIS phase block -------------------------------------------------------

@dataclass
class RisSubproblem:
    """Quadratic/quartic data of the RIS phase subproblem."""

    g_bu: np.ndarray       # (K, M, N_t) per-user cascade factors
    t1: np.ndarray         # (M, M) target receive-side quartic factor
    t2: np.ndarray         # (M, M) target transmit-side quartic factor
    r1: np.ndarray         # (C, M, M) clutter receive-side factors
    r2: np.ndarray         # (C, M, M) clutter transmit-side factors
    a_quad: np.ndarray     # (M, M) communication objective quadratic
    b_lin: np.ndarray      # (M,) communication objective linear part
    u_norm2: float


def build_ris_subproblem(ch: ChannelSet, w: np.ndarray, u: np.ndarray,
                         aux: FpAuxiliaries,
                         cfg: ScenarioConfig) -> RisSubproblem:
    """Assemble all matrices of the phase subproblem at the current state."""
    k_users, n_tx = w.shape
    m = ch.m_ris
    freqs = cfg.f_ref + ch.offsets.offsets

    g_bu = np.empty((k_users, m, n_tx), dtype=complex)
    for k in range(k_users):
        g_bu[k] = ch.h_ru[k].conj().T * ch.h_br

    urb = u.conj() @ ch.h_rb0                              # (M,)
    c1 = ch.a_tar_r0 * urb
    t1 = cfg.beta_target * np.outer(c1.conj(), c1)

    def tx_side(a_t0, dist):
        ramp = np.exp(-2j * np.pi * freqs * (ch.d_bs + 2.0 * dist) / C_LIGHT)
        g_mat = ch.h_br * ramp[None, :]                    # (M, N_t)
        t = np.zeros((m, m), dtype=complex)
        for k in range(k_users):
            d = a_t0.conj() * (g_mat @ w[k])
            t += np.outer(d.conj(), d)
        return t

    t2 = tx_side(ch.a_tar_t0, ch.d_rt)
    r1 = np.empty((ch.c_clutters, m, m), dtype=complex)
    r2 = np.empty_like(r1)
    for c in range(ch.c_clutters):
        cc = ch.a_clu_r0[c] * urb
        r1[c] = cfg.beta_clutter * np.outer(cc.conj(), cc)
        r2[c] = tx_side(ch.a_clu_t0[c], float(ch.d_rc[c]))

    a_quad = np.zeros((m, m), dtype=complex)
    b_lin = np.zeros(m, dtype=complex)
    for k in range(k_users):
        for kp in range(k_users):
            v = g_bu[k].conj() @ w[kp]
            a_quad += abs(aux.alpha[k]) ** 2 * np.outer(v, v.conj())
            if kp == k:
                b_lin += (np.sqrt(1.0 + aux.wbar[k])
                          * np.conj(aux.alpha[k]) * v)
    a_quad = 0.5 * (a_quad + a_quad.conj().T)
    return RisSubproblem(g_bu=g_bu, t1=t1, t2=t2, r1=r1, r2=r2,
                         a_quad=a_quad, b_lin=b_lin,
                         u_norm2=float(np.real(u.conj() @ u)))


def _quartic(theta, p, q):
    """(theta^H P theta)(theta^H Q theta), real for Hermitian P, Q."""
    a = float(np.real(theta.conj() @ p @ theta))
    b = float(np.real(theta.conj() @ q @ theta))
    return a * b


def ris_quartic_lower_bound(theta, theta_t, t1, t2):
    """Tangent-plane lower bound of the target quartic at theta_t."""
    cross = complex(theta.conj() @ t1 @ theta_t) * complex(
        theta_t.conj() @ t2 @ theta)
    return 2.0 * np.real(cross) - _quartic(theta_t, t1, t2)


def _surrogate_scnr_constraint(sub: RisSubproblem, theta_t: np.ndarray,
                               gamma: float, sigma_r2: float):
    """Quadratic surrogate (G, r) of the SCNR constraint, tight at theta_t.

    The surrogate satisfies theta^H G theta + r <= 0 => SCNR >= gamma on
    the unit-modulus set; the target quartic is lower-bounded by its
    tangent plane and each clutter quartic upper-bounded by a max-eigenvalue
    shift.
    """
    m = theta_t.shape[0]
    outer_t = np.outer(theta_t, theta_t.conj())
    g = -(sub.t1 @ outer_t @ sub.t2 + sub.t2 @ outer_t @ sub.t1)
    r = _quartic(theta_t, sub.t1, sub.t2) + gamma * sub.u_norm2 * sigma_r2
    for c in range(sub.r1.shape[0]):
        r1c, r2c = sub.r1[c], sub.r2[c]
        lam = float(np.real(np.trace(r1c))
                    * np.linalg.eigvalsh(0.5 * (r2c + r2c.conj().T))[-1])
        g += gamma * (r1c @ outer_t @ r2c + r2c @ outer_t @ r1c
                      - 2.0 * lam * outer_t)
        r += gamma * (2.0 * m * m * lam - _quartic(theta_t, r1c, r2c))
    return 0.5 * (g + g.conj().T), float(r)


def _ris_comm_value(sub: RisSubproblem, theta: np.ndarray) -> float:
    """Negated communication part of the surrogate objective in theta."""
    quad = float(np.real(theta.conj() @ sub.a_quad @ theta))
    lin = float(np.real(sub.b_lin.conj() @ theta))
    return quad - 2.0 * lin


def _true_scnr_from_sub(sub: RisSubproblem, theta: np.ndarray,
                        sigma_r2: float) -> float:
    num = _quartic(theta, sub.t1, sub.t2)
    den = sub.u_norm2 * sigma_r2
    for c in range(sub.r1.shape[0]):
        den += _quartic(theta, sub.r1[c], sub.r2[c])
    return num / den


def update_ris_sadmm(ch: ChannelSet, w: np.ndarray, u: np.ndarray,
                     aux: FpAuxiliaries, theta: np.ndarray,
                     cfg: ScenarioConfig, opts: SolverOptions,
                     ignore_scnr: bool = False,
                     gamma: float | None = None):
    """RIS phase update: outer MM steps, inner symmetric ADMM.

    Returns (theta, last_primal_residual). The update never worsens the
    surrogate objective and never leaves the SCNR-feasible set: every
    candidate is vetted against the exact quartic SCNR before acceptance.
    """
    if gamma is None:
        gamma = cfg.gamma_t
    sub = build_ris_subproblem(ch, w, u, aux, cfg)
    sigma_r2 = cfg.noise_radar_watt
    # penalty relative to the objective's own curvature scale, so the
    # proximal term neither swamps nor vanishes against the physics
    curv = float(np.linalg.eigvalsh(sub.a_quad)[-1])
    mu = opts.sadmm_mu_pen * max(curv, 1e-30)
    best = theta.copy()
    best_val = _ris_comm_value(sub, best)
    residual = 0.0

    for _ in range(opts.mm_steps):
        theta_t = best
        if not ignore_scnr:
            g_cons, r_cons = _surrogate_scnr_constraint(sub, theta_t, gamma,
                                                        sigma_r2)
            scale = max(np.linalg.norm(g_cons), 1e-30)
            g_cons = g_cons / scale
            r_cons = r_cons / scale

        th = theta_t.copy()
        phi = theta_t.copy()
        rho = np.zeros_like(th)
        a_mat = sub.a_quad + 0.5 * mu * np.eye(th.shape[0], dtype=complex)
        for _ in range(opts.sadmm_max_iters):
            b_vec = sub.b_lin + 0.5 * mu * phi - 0.5 * rho
            if ignore_scnr:
                th = np.linalg.solve(a_mat, b_vec)
            else:
                try:
                    th, _ = solve_qcqp1(
                        Qcqp1Problem(a_mat=a_mat, b_vec=b_vec,
                                     p_mat=g_cons, r_const=r_cons),
                        tol=opts.qcqp_tol)
                except Infeasible:
                    th = theta_t.copy()
                    break
            rho = rho + opts.sadmm_r1 * mu * (th - phi)
            phi = np.exp(1j * np.angle(th + rho / mu))
            rho = rho + opts.sadmm_r2 * mu * (th - phi)
            residual = float(np.linalg.norm(th - phi))
            if residual <= opts.sadmm_primal_tol:
                break

        # Backtrack toward the incumbent until the projected candidate
        # both improves the objective and stays SCNR feasible.
        accepted = False
        for tau in (1.0, 0.5, 0.25, 0.125):
            cand = np.exp(1j * np.angle(theta_t + tau * (th - theta_t)))
            cand_val = _ris_comm_value(sub, cand)
            feasible = (ignore_scnr
                        or _true_scnr_from_sub(sub, cand, sigma_r2)
                        >= gamma * (1.0 - 1e-6))
            if feasible and cand_val < best_val - 1e-12:
                gain = best_val - cand_val
                best, best_val = cand, cand_val
                accepted = gain > opts.mm_rel_tol * max(abs(best_val), 1e-30)
                break
        if not accepted:
            break
    return best, residual


# --- frequency-offset block ------------------------------------------------

@dataclass
class _OffsetModel:
    """Offset-separable representation of all cascaded links.

    Each scalar coupling is a sum of terms c * exp(j * eta * delta_f_n)
    over transmit antennas, so coordinate updates reduce to sums of
    cosines of one offset.
    """

    gl: np.ndarray       # (K, N_t) LoS user coefficients
    gn: np.ndarray       # (K, N_t) NLoS user coefficients
    eta_u: np.ndarray    # (K,) LoS phase slopes (rad per Hz)
    eta_b: float         # NLoS phase slope
    q_t: np.ndarray      # (N_t,) target echo coefficients
    eta_t: float
    q_c: np.ndarray      # (C, N_t) clutter echo coefficients
    eta_c: np.ndarray    # (C,)
    u_norm2: float


def build_offset_model(ch: ChannelSet, theta: np.ndarray, u: np.ndarray,
                       cfg: ScenarioConfig) -> _OffsetModel:
    k_users, n_tx, m = ch.h_ru.shape
    kap = cfg.rician_kappa
    gl = np.empty((k_users, n_tx), dtype=complex)
    gn = np.empty((k_users, n_tx), dtype=complex)
    for k in range(k_users):
        beta = ch.beta_ru[k]
        base_los = np.sqrt(kap * beta / (kap + 1.0)) * ch.h_ru_los0[k]
        gl[k] = (base_los.conj() * theta) @ ch.h_br0
        for n in range(n_tx):
            nl = np.sqrt(beta / (kap + 1.0)) * ch.h_ru_nlos[k, n]
            gn[k, n] = (nl.conj() * theta) @ ch.h_br0[:, n]
    two_pi_c = 2.0 * np.pi / C_LIGHT
    eta_u = two_pi_c * (ch.d_bs + ch.d_ru)
    eta_b = two_pi_c * ch.d_bs

    urb = u.conj() @ ch.h_rb0
    left_t = (urb * theta) @ ch.a_tar_r0
    q_t = left_t * ((ch.a_tar_t0.conj() * theta) @ ch.h_br0)
    eta_t = two_pi_c * (2.0 * ch.d_bs + 2.0 * ch.d_rt)
    q_c = np.empty((ch.c_clutters, n_tx), dtype=complex)
    for c in range(ch.c_clutters):
        left = (urb * theta) @ ch.a_clu_r0[c]
        q_c[c] = left * ((ch.a_clu_t0[c].conj() * theta) @ ch.h_br0)
    eta_c = two_pi_c * (2.0 * ch.d_bs + 2.0 * ch.d_rc)
    return _OffsetModel(gl=gl, gn=gn, eta_u=eta_u, eta_b=eta_b,
                        q_t=q_t, eta_t=eta_t, q_c=q_c, eta_c=eta_c,
                        u_norm2=float(np.real(u.conj() @ u)))


def offset_user_gains(model: _OffsetModel, w: np.ndarray,
                      offsets: np.ndarray) -> np.ndarray:
    """hw[k, k'] = h_tilde_k^H w_k' as a function of the offsets."""
    e_u = np.exp(1j * np.outer(model.eta_u, offsets))      # (K, N_t)
    e_b = np.exp(1j * model.eta_b * offsets)               # (N_t,)
    coeff = model.gl.conj() * e_u + model.gn.conj() * e_b[None, :]
    return coeff @ w.T


def offset_echo_gains(model: _OffsetModel, w: np.ndarray,
                      offsets: np.ndarray):
    """(target (K,), clutter (C, K)) echo couplings u^H H w_k."""
    ramp_t = np.exp(-1j * model.eta_t * offsets)
    tar = (model.q_t * ramp_t) @ w.T
    clu = np.empty((model.q_c.shape[0], w.shape[0]), dtype=complex)
    for c in range(model.q_c.shape[0]):
        ramp = np.exp(-1j * model.eta_c[c] * offsets)
        clu[c] = (model.q_c[c] * ramp) @ w.T
    return tar, clu


def _offset_neg_objective(model: _OffsetModel, w: np.ndarray,
                          aux: FpAuxiliaries, offsets: np.ndarray) -> float:
    """Offset-dependent part of the negated fractional-program value."""
    hw = offset_user_gains(model, w, offsets)
    k_users = w.shape[0]
    val = 0.0
    for k in range(k_users):
        val -= 2.0 * np.sqrt(1.0 + aux.wbar[k]) * float(
            np.real(np.conj(aux.alpha[k]) * hw[k, k]))
        val += abs(aux.alpha[k]) ** 2 * float(np.sum(np.abs(hw[k]) ** 2))
    return val


def _offset_scnr_gap(model: _OffsetModel, w: np.ndarray, offsets: np.ndarray,
                     cfg: ScenarioConfig, gamma: float) -> float:
    """Constraint residual gamma * (clutter + noise) - target; <= 0 feasible."""
    tar, clu = offset_echo_gains(model, w, offsets)
    num = cfg.beta_target * float(np.sum(np.abs(tar) ** 2))
    den = gamma * (cfg.beta_clutter * float(np.sum(np.abs(clu) ** 2))
                   + model.u_norm2 * cfg.noise_radar_watt)
    return den - num


def _majorize_terms(terms, x0):
    """Sum quadratic majorizers of signed cosines into (a, b, c)."""
    a = b = c = 0.0
    for xi, eta, rho in terms:
        a2, x_c, c0 = cos_quadratic_majorizer(xi, eta, rho, x0)
        a += a2
        b += -2.0 * a2 * x_c
        c += a2 * x_c * x_c + c0
    return a, b, c


def update_offsets_sca(ch: ChannelSet, w: np.ndarray, u: np.ndarray,
                       aux: FpAuxiliaries, theta: np.ndarray,
                       cfg: ScenarioConfig, opts: SolverOptions,
                       ignore_scnr: bool = False,
                       gamma: float | None = None) -> FrequencyOffsets:
    """Cyclic coordinate update of the per-antenna frequency offsets.

    For each antenna the surrogate objective and SCNR constraint are sums
    of majorized cosines in that offset alone; the scalar quadratic
    program is solved in closed form. Tightness at the incumbent keeps
    the iterate feasible and the surrogate monotone.
    """
    if gamma is None:
        gamma = cfg.gamma_t
    model = build_offset_model(ch, theta, u, cfg)
    offsets = ch.offsets.offsets.copy()
    k_users, n_tx = w.shape
    noise = cfg.noise_user_watt

    for _ in range(opts.sca_passes):
        for n in range(n_tx):
            x0 = offsets[n]
            hw = offset_user_gains(model, w, offsets)
            tar, clu = offset_echo_gains(model, w, offsets)

            obj_terms = []
            for k in range(k_users):
                al2 = abs(aux.alpha[k]) ** 2
                b1 = model.gl[k, n].conj() * np.exp(1j * model.eta_u[k] * x0)
                b2 = model.gn[k, n].conj() * np.exp(1j * model.eta_b * x0)
                for kp in range(k_users):
                    wkn = w[kp, n]
                    amp = hw[k, kp] - wkn * (b1 + b2)
                    c1 = wkn * model.gl[k, n].conj()
                    c2 = wkn * model.gn[k, n].conj()
                    # minus the linear reward term, plus the penalty terms
                    if kp == k:
                        s = 2.0 * np.sqrt(1.0 + aux.wbar[k])
                        z1 = np.conj(aux.alpha[k]) * c1
                        z2 = np.conj(aux.alpha[k]) * c2
                        obj_terms.append((-s * abs(z1), model.eta_u[k],
                                          float(np.angle(z1))))
                        obj_terms.append((-s * abs(z2), model.eta_b,
                                          float(np.angle(z2))))
                    z1 = amp.conjugate() * c1
                    z2 = amp.conjugate() * c2
                    z12 = c1 * c2.conjugate()
                    obj_terms.append((al2 * 2.0 * abs(z1), model.eta_u[k],
                                      float(np.angle(z1))))
                    obj_terms.append((al2 * 2.0 * abs(z2), model.eta_b,
                                      float(np.angle(z2))))
                    obj_terms.append((al2 * 2.0 * abs(z12),
                                      model.eta_u[k] - model.eta_b,
                                      float(np.angle(z12))))
            a_o, b_o, c_o = _majorize_terms(obj_terms, x0)

            if ignore_scnr:
                cons = (0.0, 0.0, -1.0)
            else:
                cons_terms = []
                cons_const = gamma * model.u_norm2 * cfg.noise_radar_watt
                for k in range(k_users):
                    ct = w[k, n] * model.q_t[n]
                    amp = tar[k] - ct * np.exp(-1j * model.eta_t * x0)
                    z = amp.conjugate() * ct
                    cons_const -= cfg.beta_target * (abs(amp) ** 2
                                                     + abs(ct) ** 2)
                    cons_terms.append((-cfg.beta_target * 2.0 * abs(z),
                                       -model.eta_t, float(np.angle(z))))
                    for c in range(ch.c_clutters):
                        cc = w[k, n] * model.q_c[c, n]
                        ampc = clu[c, k] - cc * np.exp(
                            -1j * model.eta_c[c] * x0)
                        zc = ampc.conjugate() * cc
                        cons_const += gamma * cfg.beta_clutter * (
                            abs(ampc) ** 2 + abs(cc) ** 2)
                        cons_terms.append(
                            (gamma * cfg.beta_clutter * 2.0 * abs(zc),
                             -model.eta_c[c], float(np.angle(zc))))
                a_g, b_g, c_g = _majorize_terms(cons_terms, x0)
                cons = (a_g, b_g, c_g + cons_const)

            cand = min_quadratic_on_constrained_interval(
                (a_o, b_o, c_o), cons, 0.0, cfg.f_max, x0)

            # The majorizer can be very conservative (global curvature
            # bound), so refine with an exact line search: the separable
            # model gives the true objective and constraint per candidate.
            trial = offsets.copy()
            grid = np.linspace(0.0, cfg.f_max, opts.sca_grid + 1)
            candidates = np.concatenate((grid, [cand, x0]))
            slack = 0.0
            if not ignore_scnr:
                slack = max(_offset_scnr_gap(model, w, offsets, cfg,
                                             gamma), 0.0)
            best_x, best_val = x0, _offset_neg_objective(model, w, aux,
                                                         offsets)
            for x in candidates:
                if x == x0:
                    continue
                trial[n] = x
                if not ignore_scnr:
                    gap = _offset_scnr_gap(model, w, trial, cfg, gamma)
                    if gap > slack * (1.0 + 1e-12) + 1e-30:
                        continue
                val = _offset_neg_objective(model, w, aux, trial)
                if val < best_val:
                    best_x, best_val = x, val
            offsets[n] = best_x
    return FrequencyOffsets(offsets)


# --- radar-centric iterations and warm start -------------------------------

def _radar_beamformers(casc: CascadedChannels, u: np.ndarray,
                       cfg: ScenarioConfig) -> np.ndarray:
    """SCNR-maximizing beamformer block at full power for a fixed u."""
    n_tx = casc.h_bt.shape[1]
    vt = casc.h_bt.conj().T @ u
    num = cfg.beta_target * np.outer(vt, vt.conj())
    unorm2 = float(np.real(u.conj() @ u))
    den = (unorm2 * cfg.noise_radar_watt / cfg.p_bs_watt
           ) * np.eye(n_tx, dtype=complex)
    for c in range(casc.h_bc.shape[0]):
        vc = casc.h_bc[c].conj().T @ u
        den += cfg.beta_clutter * np.outer(vc, vc.conj())
    v = generalized_max_eigvec(num, den)
    k_users = casc.h_tilde.shape[0]
    w = np.tile(v, (k_users, 1))
    return np.sqrt(cfg.p_bs_watt / (k_users)) * w


def _radar_theta_step(ch: ChannelSet, w, u, theta, cfg,
                      opts: SolverOptions) -> np.ndarray:
    """One monotone RIS step for SCNR: shifted descent on the surrogate.

    Builds the surrogate of the constraint-form function at the current
    SCNR level (which evaluates to zero at the incumbent) and takes a
    projected minimization step; only accepted if the exact SCNR improves.
    """
    aux0 = FpAuxiliaries(alpha=np.zeros(w.shape[0], dtype=complex),
                         wbar=np.zeros(w.shape[0]))
    sub = build_ris_subproblem(ch, w, u, aux0, cfg)
    sigma_r2 = cfg.noise_radar_watt
    cur = _true_scnr_from_sub(sub, theta, sigma_r2)
    g, _ = _surrogate_scnr_constraint(sub, theta, cur, sigma_r2)
    shift = float(np.linalg.eigvalsh(g)[-1])
    cand = (shift + 1e-12) * theta - g @ theta
    norm = np.abs(cand)
    if np.min(norm) <= 1e-30:
        return theta
    cand = np.exp(1j * np.angle(cand))
    if _true_scnr_from_sub(sub, cand, sigma_r2) > cur:
        return cand
    return theta


def radar_centric_design(ch: ChannelSet, cfg: ScenarioConfig,
                         opts: SolverOptions, theta=None,
                         iters: int = 10):
    """Alternating SCNR maximization over (u, w, theta) at fixed offsets."""
    if theta is None:
        theta = np.ones(ch.m_ris, dtype=complex)
    casc = cascade(ch, theta)
    k_users = ch.k_users
    w = np.empty((k_users, ch.n_tx), dtype=complex)
    for k in range(k_users):
        h = casc.h_tilde[k]
        w[k] = np.sqrt(cfg.p_bs_watt / k_users) * h / np.linalg.norm(h)
    u = update_equalizer(w, casc, cfg)
    for _ in range(iters):
        w = _radar_beamformers(casc, u, cfg)
        u = update_equalizer(w, casc, cfg)
        theta = _radar_theta_step(ch, w, u, theta, cfg, opts)
        casc = cascade(ch, theta)
        u = update_equalizer(w, casc, cfg)
    return w, theta, u, casc


# --- outer loop ------------------------------------------------------------

def _fp_inner(w, aux, u, casc, cfg, opts, noise, gamma, ignore_scnr):
    """Iterate the beamformer/auxiliary/equalizer trio to a fixed point."""
    for _ in range(opts.fp_inner_iters):
        w_old, fp_old = w, fp_objective(w, aux, casc, noise)
        try:
            w = update_beamformers(w, aux, casc, u, cfg, opts,
                                   gamma=0.0 if ignore_scnr else gamma)
        except ScnrInfeasible:
            w = w_old
        if fp_objective(w, aux, casc, noise) < fp_old - 1e-12:
            w = w_old
        aux = update_auxiliaries(w, casc, noise)
        u = update_equalizer(w, casc, cfg)
        fp_new = fp_objective(w, aux, casc, noise)
        if abs(fp_new - fp_old) <= opts.fp_inner_tol * max(abs(fp_old),
                                                           1e-12):
            break
    return w, aux, u


def solve(channels: ChannelSet, cfg: ScenarioConfig,
          opts: SolverOptions | None = None, geom=None,
          ignore_scnr: bool = False,
          pin_offsets: str | None = None,
          warm_start: bool = True,
          init_design: IsacDesign | None = None) -> SolveResult:
    """Full alternating optimization of the sum rate.

    ``pin_offsets`` freezes the frequency offsets to "zero" (phased
    array) or "ramp" (fixed uniform increments); ``ignore_scnr`` removes
    the radar constraint entirely. ``init_design`` seeds the iterate, as
    in continuation across a sweep; the returned design is then never
    worse than the seed. Raises ScnrInfeasible when even a radar-centric
    warm start cannot reach the threshold.
    """
    if opts is None:
        opts = SolverOptions()
    noise = cfg.noise_user_watt
    gamma = cfg.gamma_t
    t_start = time.perf_counter()

    if pin_offsets == "zero":
        init_off = FrequencyOffsets.zero(cfg.n_tx)
    elif pin_offsets is None and init_design is not None:
        init_off = FrequencyOffsets(
            np.clip(init_design.offsets.offsets, 0.0, cfg.f_max))
    else:
        init_off = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    ch = with_offsets(channels, init_off, cfg)
    theta = np.ones(cfg.m_ris, dtype=complex)
    if init_design is not None:
        theta = np.exp(1j * np.angle(init_design.theta))
    casc = cascade(ch, theta)

    if init_design is not None:
        w = init_design.w.copy()
        scale = np.sqrt(cfg.p_bs_watt / max(np.sum(np.abs(w) ** 2), 1e-300))
        if scale < 1.0:
            w = w * scale
        u = update_equalizer(w, casc, cfg)
    else:
        w = np.empty((cfg.k_users, cfg.n_tx), dtype=complex)
        for k in range(cfg.k_users):
            h = casc.h_tilde[k]
            w[k] = np.sqrt(cfg.p_bs_watt / cfg.k_users) * h / np.linalg.norm(h)
        u = update_equalizer(w, casc, cfg)

    design = IsacDesign(w=w, theta=theta, offsets=ch.offsets, u=u)
    need_warm = scnr(design, casc, cfg) < gamma * (1.0 - 1e-6)
    if init_design is not None:
        run_warm = need_warm
    else:
        run_warm = (not ignore_scnr) or (warm_start and need_warm)
    if run_warm:
        # shared radar-centric warm start so every run explores from the
        # same design point regardless of how stringent the threshold is
        w_r, theta_r, u_r, casc_r = radar_centric_design(
            ch, cfg, opts, theta=theta)
        design_r = IsacDesign(w=w_r, theta=theta_r,
                              offsets=ch.offsets, u=u_r)
        feasible = scnr(design_r, casc_r, cfg) >= gamma
        if not feasible and not ignore_scnr:
            raise ScnrInfeasible("warm start cannot meet the threshold")
        w, theta, u, casc = w_r, theta_r, u_r, casc_r

    aux = update_auxiliaries(w, casc, noise)
    trace = SolverTrace()
    prev_rate = -np.inf
    converged = False
    iters = 0

    prev_theta = None
    prev_off = None

    for it in range(opts.max_outer_iters):
        iters = it + 1
        # beamformers, auxiliaries and equalizer: the inner pair is cheap
        # and linearly convergent, so iterate it to a tight fixed point
        w, aux, u = _fp_inner(w, aux, u, casc, cfg, opts, noise, gamma,
                              ignore_scnr)
        # RIS phases; refresh the auxiliaries between rounds, since the
        # surrogate headroom around the incumbent is what limits each step
        for _ in range(opts.ris_inner_iters):
            fp_old = fp_objective(w, aux, casc, noise)
            theta, residual = update_ris_sadmm(ch, w, u, aux, theta, cfg,
                                               opts, ignore_scnr=ignore_scnr)
            casc = cascade(ch, theta)
            aux = update_auxiliaries(w, casc, noise)
            fp_new = fp_objective(w, aux, casc, noise)
            if abs(fp_new - fp_old) <= opts.fp_inner_tol * max(abs(fp_old),
                                                               1e-12):
                break
        # frequency offsets
        if pin_offsets is None:
            new_off = update_offsets_sca(ch, w, u, aux, theta, cfg, opts,
                                         ignore_scnr=ignore_scnr)
            ch = with_offsets(ch, new_off, cfg)
            casc = cascade(ch, theta)
        # tighten the surrogate before logging
        aux = update_auxiliaries(w, casc, noise)

        # Safeguarded extrapolation: block coordinate steps crawl along
        # narrow valleys of the active constraint in a nearly constant
        # direction, so try amplified moves along the recent drift and
        # keep the first one that improves the exact rate while staying
        # feasible.
        if prev_theta is not None and pin_offsets is None:
            dth = np.angle(theta * np.conj(prev_theta))
            doff = ch.offsets.offsets - prev_off
            design = IsacDesign(w=w, theta=theta, offsets=ch.offsets, u=u)
            base_rate = sum_rate(design, casc, noise)
            for kappa in opts.extrap_factors:
                th_e = np.exp(1j * (np.angle(theta) + kappa * dth))
                off_e = np.clip(ch.offsets.offsets + kappa * doff,
                                0.0, cfg.f_max)
                ch_e = with_offsets(ch, FrequencyOffsets(off_e), cfg)
                casc_e = cascade(ch_e, th_e)
                aux_e = update_auxiliaries(w, casc_e, noise)
                u_e = update_equalizer(w, casc_e, cfg)
                w_e, aux_e, u_e = _fp_inner(w, aux_e, u_e, casc_e, cfg,
                                            opts, noise, gamma, ignore_scnr)
                design_e = IsacDesign(w=w_e, theta=th_e,
                                      offsets=ch_e.offsets, u=u_e)
                rate_e = sum_rate(design_e, casc_e, noise)
                feasible = (ignore_scnr or scnr(design_e, casc_e, cfg)
                            >= gamma * (1.0 - 1e-6))
                if feasible and rate_e > base_rate + 1e-12:
                    w, theta, u = w_e, th_e, u_e
                    ch, casc, aux = ch_e, casc_e, aux_e
                    break
        prev_theta = theta.copy()
        prev_off = ch.offsets.offsets.copy()

        design = IsacDesign(w=w, theta=theta, offsets=ch.offsets, u=u)
        rate = sum_rate(design, casc, noise)
        trace.append(fp_objective(w, aux, casc, noise), rate,
                     scnr(design, casc, cfg), design.power(), residual,
                     time.perf_counter() - t_start)
        if prev_rate > -np.inf:
            if abs(rate - prev_rate) < opts.rel_tol * max(abs(prev_rate),
                                                          1e-12):
                converged = True
                break
        prev_rate = rate

    design = IsacDesign(w=w, theta=theta, offsets=ch.offsets, u=u)
    return SolveResult(design=design, trace=trace, iters=iters,
                       converged=converged)


def solve_radar_centric(channels: ChannelSet, cfg: ScenarioConfig,
                        opts: SolverOptions | None = None) -> SolveResult:
    """Baseline maximizing SCNR only; offsets stay at the uniform ramp."""
    if opts is None:
        opts = SolverOptions()
    init_off = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    ch = with_offsets(channels, init_off, cfg)
    t_start = time.perf_counter()
    w, theta, u, casc = radar_centric_design(ch, cfg, opts,
                                             iters=opts.max_outer_iters)
    design = IsacDesign(w=w, theta=theta, offsets=ch.offsets, u=u)
    trace = SolverTrace()
    trace.append(0.0, sum_rate(design, casc, cfg.noise_user_watt),
                 scnr(design, casc, cfg), design.power(), 0.0,
                 time.perf_counter() - t_start)
    return SolveResult(design=design, trace=trace, iters=opts.max_outer_iters,
                       converged=True)
