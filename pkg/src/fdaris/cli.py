"""Command line interface: sweeps, SUST analysis and self checks."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import ao, sust
from .experiments import (SCHEMES, SWEEP_VARS, SweepSpec, run_sweep,
                          write_sust_csv)
from .scenario import ScenarioConfig, apply_overrides, linear_to_db, load_config


def _base_config(args) -> ScenarioConfig:
    if args.config:
        return load_config(args.config, args.set or ())
    return apply_overrides(ScenarioConfig.desk(), args.set or ())


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    spec = SweepSpec(
        sweep_var=args.sweep,
        values=tuple(float(v) for v in args.values.split(",")),
        trials=args.trials,
        schemes=tuple(args.schemes.split(",")),
        base_cfg=cfg,
        out_path=args.out,
        seed=args.seed,
    )
    result = run_sweep(spec)
    for (scheme, value), cell in sorted(result.cells.items()):
        print(f"{scheme:>14s}  {value:>12g}  "
              f"rate {cell.mean_sum_rate:8.4f} bit/s/Hz  "
              f"scnr {cell.mean_scnr_db:7.2f} dB  "
              f"iters {cell.mean_iters:5.1f}  fail {cell.failures}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def _cmd_sust_sweep(args) -> int:
    cfg = _base_config(args)
    rng = np.random.default_rng(args.seed)
    ch, _ = sust.co_directional_channels(cfg, args.delta_d, rng)
    theta = np.ones(cfg.m_ris, dtype=complex)
    scen = sust.sust_from_channels(
        ch, ScenarioConfig(**{**cfg.__dict__, "c_clutters": 1}), theta)
    grid = np.linspace(0.0, args.f_max or cfg.f_max, args.points)
    rows = []
    for delta_f in grid:
        fda = sust.closed_form_scnr_fda(scen, float(delta_f))
        pa = sust.closed_form_scnr_pa(scen)
        oracle = sust.oracle_scnr(scen, float(delta_f))
        rows.append((float(delta_f), linear_to_db(fda), linear_to_db(pa),
                     linear_to_db(oracle)))
    if args.out:
        write_sust_csv(rows, args.out)
        print(f"wrote {args.out}")
    else:
        for row in rows:
            print("%12.1f  %8.3f  %8.3f  %8.3f" % row)
    return 0


def _cmd_check(args) -> int:
    """Fixed-seed invariant suite; returns nonzero on any failure."""
    failures = 0

    def report(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    rng = np.random.default_rng(7)
    scens = [sust.random_sust_scenario(rng) for _ in range(20)]
    ok = True
    for s in scens:
        delta_f_opt, _ = sust.optimal_increment(s)
        closed = sust.closed_form_scnr_fda(s, delta_f_opt)
        oracle = sust.oracle_scnr(s, delta_f_opt)
        ok &= abs(closed - oracle) <= 1e-6 * oracle
        ok &= closed >= sust.closed_form_scnr_pa(s) - 1e-12
    report("sust closed form vs oracle", ok)

    from .channels import build_channel_set, cascade, FrequencyOffsets
    from .metrics import IsacDesign, scnr, sum_rate
    from .scenario import sample_scenario
    cfg = ScenarioConfig.desk()
    geom = sample_scenario(cfg, rng)
    offs = FrequencyOffsets.uniform_ramp(cfg.n_tx, cfg.f_max)
    ch = build_channel_set(geom, offs, cfg, rng)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.m_ris))
    casc = cascade(ch, theta)
    report("steering vectors unit modulus",
           float(np.max(np.abs(np.abs(ch.a_tar_t) - 1.0))) < 1e-12)
    casc2 = cascade(ch, np.exp(1j * 0.7) * theta)
    w = (rng.standard_normal((cfg.k_users, cfg.n_tx))
         + 1j * rng.standard_normal((cfg.k_users, cfg.n_tx)))
    w *= np.sqrt(cfg.p_bs_watt / np.sum(np.abs(w) ** 2))
    u = rng.standard_normal(cfg.n_rx) + 1j * rng.standard_normal(cfg.n_rx)
    design = IsacDesign(w=w, theta=theta, offsets=offs, u=u)
    design2 = IsacDesign(w=w, theta=casc2.theta, offsets=offs, u=u)
    r1 = sum_rate(design, casc, cfg.noise_user_watt)
    r2 = sum_rate(design2, casc2, cfg.noise_user_watt)
    s1 = scnr(design, casc, cfg)
    s2 = scnr(design2, casc2, cfg)
    report("global RIS phase invariance",
           abs(r1 - r2) < 1e-9 * max(abs(r1), 1.0)
           and abs(s1 - s2) < 1e-9 * max(abs(s1), 1.0))

    res = ao.solve(ch, cfg, ao.SolverOptions(max_outer_iters=10))
    rates = np.array(res.trace.sum_rate)
    report("solver trace monotone",
           bool(np.all(np.diff(rates) >= -1e-8)))
    report("solver meets scnr threshold",
           res.trace.scnr[-1] >= cfg.gamma_t * (1.0 - 1e-6))
    print(f"{failures} failure(s)")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isac",
        description="FDA + RIS ISAC simulator and optimizer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Monte Carlo parameter sweep")
    p_run.add_argument("--config", help="flat key=value scenario file")
    p_run.add_argument("--sweep", required=True, choices=SWEEP_VARS)
    p_run.add_argument("--values", required=True,
                       help="comma separated sweep values")
    p_run.add_argument("--schemes", default="prop_ao",
                       help=f"comma separated subset of {','.join(SCHEMES)}")
    p_run.add_argument("--trials", type=int, default=20)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", help="output CSV path")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario key")
    p_run.set_defaults(func=_cmd_run)

    p_sust = sub.add_parser("sust-sweep",
                            help="closed-form vs oracle SCNR sweep")
    p_sust.add_argument("--config", help="flat key=value scenario file")
    p_sust.add_argument("--delta-d", type=float, default=4.0,
                        help="target-clutter range offset in meters")
    p_sust.add_argument("--f-max", type=float, default=None,
                        help="upper end of the frequency increment grid")
    p_sust.add_argument("--points", type=int, default=50)
    p_sust.add_argument("--seed", type=int, default=0)
    p_sust.add_argument("--out", help="output CSV path")
    p_sust.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sust.set_defaults(func=_cmd_sust_sweep)

    p_check = sub.add_parser("check", help="run the fixed-seed self checks")
    p_check.set_defaults(func=_cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
