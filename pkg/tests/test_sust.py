"""Unit tests for the closed-form single-target SCNR analysis."""

import numpy as np
import pytest

from fdaris.scenario import C_LIGHT, ScenarioConfig
from fdaris.sust import (SustScenario, analyze, closed_form_scnr_fda,
                         closed_form_scnr_pa, co_directional_channels,
                         dirichlet_kernel_sq, optimal_increment, oracle_scnr,
                         random_sust_scenario, scnr_increment_max,
                         sust_from_channels)


def _scenario(**over):
    base = dict(n_tx=4, n_rx=2, p_bs=1.0, sigma_r2=1e-10, beta_t=1e-6,
                beta_c=1e-6, p_tar=1e-3 + 0.0j, delta_d=5.0,
                delta_f_max=8e6)
    base.update(over)
    return SustScenario(**base)


def test_scenario_validation():
    with pytest.raises(ValueError):
        _scenario(delta_d=0.0)
    with pytest.raises(ValueError):
        _scenario(p_bs=-1.0)
    with pytest.raises(ValueError):
        _scenario(p_tar=0.0)


def test_dirichlet_kernel_endpoints():
    n, dd = 4, 5.0
    assert dirichlet_kernel_sq(0.0, n, dd) == pytest.approx(n * n)
    f_zero = C_LIGHT / (2.0 * n * dd)
    assert dirichlet_kernel_sq(f_zero, n, dd) == pytest.approx(0.0, abs=1e-9)
    # one full period of the inner phase recovers the peak
    f_per = C_LIGHT / (2.0 * dd)
    assert dirichlet_kernel_sq(f_per, n, dd) == pytest.approx(n * n)
    grid = np.linspace(0.0, f_per, 500)
    vals = [dirichlet_kernel_sq(f, n, dd) for f in grid]
    assert 0.0 <= min(vals) and max(vals) <= n * n + 1e-9


def test_pa_equals_fda_at_zero_increment():
    s = _scenario()
    assert closed_form_scnr_pa(s) == pytest.approx(
        closed_form_scnr_fda(s, 0.0))


def test_optimal_increment_clipping():
    s = _scenario(delta_f_max=1e12)
    opt, zero = optimal_increment(s)
    assert opt == pytest.approx(zero)
    s2 = _scenario(delta_f_max=1e3)
    opt2, zero2 = optimal_increment(s2)
    assert opt2 == pytest.approx(1e3)
    assert zero2 == pytest.approx(zero)


def test_increment_gain_consistency():
    """The gain formula equals the difference of the two closed forms."""
    rng = np.random.default_rng(0)
    for _ in range(30):
        s = random_sust_scenario(rng)
        opt, _ = optimal_increment(s)
        diff = closed_form_scnr_fda(s, opt) - closed_form_scnr_pa(s)
        assert scnr_increment_max(s) == pytest.approx(
            diff, rel=1e-10, abs=1e-30)


def test_analyze_bundles_everything():
    s = _scenario()
    res = analyze(s)
    assert res.gamma_fda == pytest.approx(
        closed_form_scnr_fda(s, res.delta_f_opt))
    assert res.gamma_pa == pytest.approx(closed_form_scnr_pa(s))
    assert res.delta_f_opt == pytest.approx(
        min(s.delta_f_max, res.delta_f_zero))


def test_oracle_matches_closed_form_on_small_grid():
    rng = np.random.default_rng(1)
    for _ in range(5):
        s = random_sust_scenario(rng)
        for f in np.linspace(0.0, s.delta_f_max, 7):
            ref = closed_form_scnr_fda(s, f)
            got = oracle_scnr(s, f)
            assert got == pytest.approx(ref, rel=1e-9)


def test_oracle_independent_of_carrier():
    s = _scenario()
    a = oracle_scnr(s, 2e6, f_ref=10e9)
    b = oracle_scnr(s, 2e6, f_ref=24e9)
    assert a == pytest.approx(b, rel=1e-9)


def test_sust_from_co_directional_channels():
    """Channel-level synthesis reproduces the scalar scenario inputs."""
    cfg = ScenarioConfig.desk()
    rng = np.random.default_rng(4)
    ch, geom = co_directional_channels(cfg, delta_d=4.0, rng=rng)
    theta = np.ones(cfg.m_ris, dtype=complex)
    s = sust_from_channels(ch, cfg, theta)
    assert s.delta_d == pytest.approx(4.0)
    assert s.n_tx == cfg.n_tx and s.n_rx == cfg.n_rx
    assert s.p_bs == pytest.approx(cfg.p_bs_watt)
    assert abs(s.p_tar) > 0.0


def test_sust_from_channels_rejects_off_axis_clutter():
    cfg = ScenarioConfig.desk()
    rng = np.random.default_rng(5)
    from fdaris.channels import FrequencyOffsets, build_channel_set
    from fdaris.scenario import sample_scenario
    geom = sample_scenario(cfg, rng)  # random clutter directions
    ch = build_channel_set(geom, FrequencyOffsets.zero(cfg.n_tx), cfg, rng)
    theta = np.ones(cfg.m_ris, dtype=complex)
    with pytest.raises(ValueError):
        sust_from_channels(ch, cfg, theta)


def test_random_scenarios_are_valid_and_varied():
    rng = np.random.default_rng(6)
    dims = {(s.n_tx, s.n_rx) for s in
            (random_sust_scenario(rng) for _ in range(40))}
    assert len(dims) > 5
