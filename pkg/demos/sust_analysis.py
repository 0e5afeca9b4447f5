"""Single-target sensing analysis: how the frequency increment helps.

Builds a co-directional target/clutter scene, sweeps the per-antenna
frequency increment, and shows that the SCNR climbs until the first zero
of the array autocorrelation kernel and saturates beyond it. Also prints
the closed-form optimum and the scaling of the peak gain with transmit
power and receive antennas.

Run with: python3 demos/sust_analysis.py
"""

from dataclasses import replace

import numpy as np

from fdaris.scenario import ScenarioConfig, linear_to_db
from fdaris.sust import (analyze, closed_form_scnr_fda, closed_form_scnr_pa,
                         co_directional_channels, oracle_scnr,
                         scnr_increment_max, sust_from_channels)


def main():
    cfg = ScenarioConfig.desk(c_clutters=1)
    rng = np.random.default_rng(0)
    ch, _ = co_directional_channels(cfg, delta_d=5.0, rng=rng)
    theta = np.ones(cfg.m_ris, dtype=complex)
    scen = sust_from_channels(ch, cfg, theta)
    scen = replace(scen, delta_f_max=4.0 * analyze(scen).delta_f_zero)

    res = analyze(scen)
    print("co-directional target/clutter scene")
    print(f"  clutter {scen.delta_d:.1f} m behind the target")
    print(f"  first kernel zero at  {res.delta_f_zero / 1e6:8.3f} MHz")
    print(f"  best increment        {res.delta_f_opt / 1e6:8.3f} MHz")
    print(f"  SCNR zero increment   {linear_to_db(res.gamma_pa):8.2f} dB")
    print(f"  SCNR best increment   {linear_to_db(res.gamma_fda):8.2f} dB")
    print()

    print("increment sweep (closed form vs eigen-solver oracle)")
    print(f"  {'df [MHz]':>10s} {'closed [dB]':>12s} {'oracle [dB]':>12s}")
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0):
        df = frac * res.delta_f_zero
        cf = closed_form_scnr_fda(scen, df)
        oc = oracle_scnr(scen, df)
        print(f"  {df / 1e6:10.3f} {linear_to_db(cf):12.3f}"
              f" {linear_to_db(oc):12.3f}")
    print("  (the peak repeats at every kernel zero and is never exceeded,")
    print("   so raising the increment cap beyond the first zero buys"
          " nothing)")
    print()

    base = scnr_increment_max(scen)
    double_p = scnr_increment_max(replace(scen, p_bs=2.0 * scen.p_bs))
    double_r = scnr_increment_max(replace(scen, n_rx=2 * scen.n_rx))
    print("peak SCNR gain scaling")
    print(f"  2x transmit power  -> gain x {double_p / base:.3f}")
    print(f"  2x receive antennas-> gain x {double_r / base:.3f}")
    print(f"  zero-increment SCNR check: "
          f"{linear_to_db(closed_form_scnr_pa(scen)):.2f} dB")


if __name__ == "__main__":
    main()
