"""Unit tests for the alternating optimization blocks and the outer loop."""

import numpy as np
import pytest

from fdaris.ao import (ScnrInfeasible, SolverOptions, build_offset_model,
                       build_ris_subproblem, fp_objective, offset_echo_gains,
                       offset_user_gains, radar_centric_design,
                       ris_quartic_lower_bound, solve, solve_radar_centric,
                       update_auxiliaries, update_beamformers,
                       update_equalizer, update_offsets_sca, update_ris_sadmm)
from fdaris.channels import (FrequencyOffsets, build_channel_set, cascade,
                             with_offsets)
from fdaris.metrics import IsacDesign, scnr, sum_rate, user_sinr
from fdaris.scenario import ScenarioConfig, sample_scenario


def _state(seed=0, cfg=None):
    cfg = cfg or ScenarioConfig.desk()
    rng = np.random.default_rng(seed)
    geom = sample_scenario(cfg, rng)
    off = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    ch = build_channel_set(geom, off, cfg, rng)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.m_ris))
    casc = cascade(ch, theta)
    w = np.empty((cfg.k_users, cfg.n_tx), dtype=complex)
    for k in range(cfg.k_users):
        h = casc.h_tilde[k]
        w[k] = np.sqrt(cfg.p_bs_watt / cfg.k_users) * h / np.linalg.norm(h)
    u = update_equalizer(w, casc, cfg)
    return cfg, ch, theta, casc, w, u


def _feasible_state(seed=0):
    """A sensing-feasible iterate, as produced by the warm start."""
    cfg = ScenarioConfig.desk()
    rng = np.random.default_rng(seed)
    geom = sample_scenario(cfg, rng)
    off = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    ch = build_channel_set(geom, off, cfg, rng)
    w, theta, u, casc = radar_centric_design(ch, cfg, SolverOptions())
    return cfg, ch, theta, casc, w, u


def test_surrogate_tight_after_auxiliary_refresh():
    """With fresh auxiliaries the surrogate equals the exact ln-sum-rate."""
    cfg, _, _, casc, w, u = _state()
    noise = cfg.noise_user_watt
    aux = update_auxiliaries(w, casc, noise)
    exact = sum(np.log1p(user_sinr(
        IsacDesign(w=w, theta=np.ones(1), offsets=None, u=u), casc, k, noise))
        for k in range(cfg.k_users))
    assert fp_objective(w, aux, casc, noise) == pytest.approx(
        exact, abs=1e-12)


def test_beamformer_update_improves_surrogate():
    cfg, _, _, casc, w, u = _state(seed=1)
    noise = cfg.noise_user_watt
    opts = SolverOptions()
    aux = update_auxiliaries(w, casc, noise)
    before = fp_objective(w, aux, casc, noise)
    w2 = update_beamformers(w, aux, casc, u, cfg, opts, gamma=0.0)
    after = fp_objective(w2, aux, casc, noise)
    assert after >= before - 1e-10
    assert np.sum(np.abs(w2) ** 2) == pytest.approx(cfg.p_bs_watt)


def test_beamformer_update_respects_scnr_bound():
    cfg, _, _, casc, w, u = _feasible_state(seed=2)
    aux = update_auxiliaries(w, casc, cfg.noise_user_watt)
    gamma = cfg.gamma_t
    w2 = update_beamformers(w, aux, casc, u, cfg, SolverOptions(),
                            gamma=gamma)
    d = IsacDesign(w=w2, theta=np.ones(1), offsets=None, u=u)
    assert scnr(d, casc, cfg) >= gamma * (1.0 - 1e-8)


def test_equalizer_is_scnr_optimal():
    cfg, _, _, casc, w, u = _state(seed=3)
    d = IsacDesign(w=w, theta=np.ones(1), offsets=None, u=u)
    best = scnr(d, casc, cfg)
    rng = np.random.default_rng(7)
    for _ in range(50):
        d.u = rng.standard_normal(cfg.n_rx) + 1j * rng.standard_normal(
            cfg.n_rx)
        assert best >= scnr(d, casc, cfg) - 1e-9 * best


def test_quartic_tangent_bound():
    """The tangent plane touches at the incumbent and stays below."""
    cfg, ch, theta, casc, w, u = _state(seed=4)
    aux = update_auxiliaries(w, casc, cfg.noise_user_watt)
    sub = build_ris_subproblem(ch, w, u, aux, cfg)

    def quartic(th):
        return (np.real(th.conj() @ sub.t1 @ th)
                * np.real(th.conj() @ sub.t2 @ th))

    assert ris_quartic_lower_bound(theta, theta, sub.t1, sub.t2) == \
        pytest.approx(quartic(theta), rel=1e-10)
    rng = np.random.default_rng(8)
    for _ in range(30):
        other = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.m_ris))
        lb = ris_quartic_lower_bound(other, theta, sub.t1, sub.t2)
        assert lb <= quartic(other) + 1e-9 * max(abs(quartic(other)), 1.0)


def test_ris_update_keeps_modulus_and_feasibility():
    cfg, ch, theta, casc, w, u = _feasible_state(seed=5)
    noise = cfg.noise_user_watt
    opts = SolverOptions()
    aux = update_auxiliaries(w, casc, noise)
    before = fp_objective(w, aux, casc, noise)
    theta2, residual = update_ris_sadmm(ch, w, u, aux, theta, cfg, opts)
    assert np.max(np.abs(np.abs(theta2) - 1.0)) < 1e-12
    assert residual >= 0.0
    casc2 = cascade(ch, theta2)
    after = fp_objective(w, aux, casc2, noise)
    assert after >= before - 1e-10
    d = IsacDesign(w=w, theta=theta2, offsets=ch.offsets, u=u)
    assert scnr(d, casc2, cfg) >= cfg.gamma_t * (1.0 - 1e-5)


def test_offset_model_reproduces_cascade_couplings():
    """The separable model matches a full channel rebuild at any offsets."""
    cfg, ch, theta, casc, w, u = _state(seed=6)
    model = build_offset_model(ch, theta, u, cfg)
    rng = np.random.default_rng(11)
    for _ in range(5):
        off = rng.uniform(0.0, cfg.f_max, cfg.n_tx)
        ch2 = with_offsets(ch, FrequencyOffsets(off), cfg)
        casc2 = cascade(ch2, theta)
        hw_ref = casc2.h_tilde.conj() @ w.T
        hw = offset_user_gains(model, w, off)
        assert np.max(np.abs(hw - hw_ref)) < 1e-9 * np.max(np.abs(hw_ref))
        tar, clu = offset_echo_gains(model, w, off)
        tar_ref = np.array([u.conj() @ casc2.h_bt @ w[k]
                            for k in range(cfg.k_users)])
        assert np.max(np.abs(tar - tar_ref)) < 1e-9 * max(
            np.max(np.abs(tar_ref)), 1e-30)
        for c in range(cfg.c_clutters):
            ref = np.array([u.conj() @ casc2.h_bc[c] @ w[k]
                            for k in range(cfg.k_users)])
            assert np.max(np.abs(clu[c] - ref)) < 1e-9 * max(
                np.max(np.abs(ref)), 1e-30)


def test_offset_update_monotone_and_bounded():
    cfg, ch, theta, casc, w, u = _feasible_state(seed=7)
    noise = cfg.noise_user_watt
    opts = SolverOptions()
    aux = update_auxiliaries(w, casc, noise)
    before = fp_objective(w, aux, casc, noise)
    new_off = update_offsets_sca(ch, w, u, aux, theta, cfg, opts)
    off = new_off.offsets
    assert np.all(off >= 0.0) and np.all(off <= cfg.f_max + 1e-9)
    ch2 = with_offsets(ch, new_off, cfg)
    casc2 = cascade(ch2, theta)
    after = fp_objective(w, aux, casc2, noise)
    assert after >= before - 1e-10
    d = IsacDesign(w=w, theta=theta, offsets=new_off, u=u)
    assert scnr(d, casc2, cfg) >= cfg.gamma_t * (1.0 - 1e-5)


def _solve_state(seed=0, cfg=None):
    cfg = cfg or ScenarioConfig.desk()
    rng = np.random.default_rng(seed)
    geom = sample_scenario(cfg, rng)
    off = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    return cfg, build_channel_set(geom, off, cfg, rng)


def test_solve_meets_all_design_constraints():
    cfg, ch = _solve_state(seed=0)
    res = solve(ch, cfg)
    assert res.converged
    d = res.design
    assert np.max(np.abs(np.abs(d.theta) - 1.0)) < 1e-12
    assert d.power() <= cfg.p_bs_watt * (1.0 + 1e-9)
    off = d.offsets.offsets
    assert np.all(off >= 0.0) and np.all(off <= cfg.f_max + 1e-9)
    casc = cascade(with_offsets(ch, d.offsets, cfg), d.theta)
    assert scnr(d, casc, cfg) >= cfg.gamma_t * (1.0 - 1e-6)
    rates = np.asarray(res.trace.sum_rate)
    assert np.all(np.diff(rates) >= -1e-8)
    assert rates[-1] == pytest.approx(sum_rate(d, casc, cfg.noise_user_watt))


def test_relaxed_solve_beats_constrained():
    cfg, ch = _solve_state(seed=1)
    hard = solve(ch, cfg)
    free = solve(ch, cfg, ignore_scnr=True,
                 init_design=hard.design)
    assert free.trace.sum_rate[-1] >= hard.trace.sum_rate[-1] - 1e-9


def test_pinned_offsets_stay_pinned():
    cfg, ch = _solve_state(seed=2)
    pa = solve(ch, cfg, pin_offsets="zero")
    assert np.all(pa.design.offsets.offsets == 0.0)
    ramp = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max).offsets
    fda = solve(ch, cfg, pin_offsets="ramp")
    assert np.allclose(fda.design.offsets.offsets, ramp)


def test_continuation_never_worse_than_seed():
    cfg, ch = _solve_state(seed=3)
    first = solve(ch, cfg)
    again = solve(ch, cfg, init_design=first.design)
    assert again.trace.sum_rate[-1] >= first.trace.sum_rate[-1] - 1e-9


def test_solve_raises_on_unreachable_threshold():
    cfg, ch = _solve_state(seed=4, cfg=ScenarioConfig.desk(gamma_t_db=40.0))
    with pytest.raises(ScnrInfeasible):
        solve(ch, cfg)


def test_radar_centric_prioritizes_sensing():
    cfg, ch = _solve_state(seed=5)
    radar = solve_radar_centric(ch, cfg)
    joint = solve(ch, cfg)
    assert radar.trace.scnr[-1] >= joint.trace.scnr[-1] * (1.0 - 1e-6)
    assert np.isfinite(radar.trace.sum_rate[-1])
