"""Command-line entry point.

Subcommands: validate | analyze | simulate | figure | sweep.  Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from ngssk.analysis import (
    CurveTable,
    ber_bound_noma_user,
    ber_overall,
    pep_gssk_closed_form,
    pep_gssk_quadrature,
    pep_param_a,
    rate_noma_user,
    union_bound_gssk,
)
from ngssk.codebook import build_codebook
from ngssk.config import ConfigError, load_config, snr_to_linear, validate_config
from ngssk.montecarlo import run_gssk_ber, run_noma_ber, run_rate_curves
from ngssk.phy import psk_constellation
from ngssk.recipes import FIGURE_IDS, SWEEP_SNR_DB, run_figure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_grid(spec: str) -> tuple[float, ...]:
    """Parse an "a:step:b" dB grid with inclusive endpoints."""
    try:
        lo, step, hi = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse snr grid {spec!r}; expected a:step:b") from exc
    if step <= 0 or hi < lo:
        raise ConfigError(f"invalid snr grid {spec!r}")
    out = []
    k = 0
    while (val := lo + k * step) <= hi + 1e-9:
        out.append(round(val, 9))
        k += 1
    return tuple(out)


def _load(args) -> "SystemConfig":
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials_per_point"] = args.trials
    if getattr(args, "snr_grid", None) is not None:
        overrides["snr_grid_db"] = _parse_grid(args.snr_grid)
    return validate_config(replace(cfg, **overrides)) if overrides else cfg


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(f"ok: {cfg}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _load(args)
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    const = psk_constellation(cfg.psk_order)
    tag = f"Nt={cfg.n_transmit} nt={cfg.n_active} M={cfg.n_noma_users}"
    table = CurveTable()
    for snr_db in cfg.snr_grid_db:
        snr = snr_to_linear(snr_db, cfg.n_active)
        a = pep_param_a(snr.rho_prime, cfg.total_power, cfg.noise_var, cfg.n_active)
        closed = pep_gssk_closed_form(a)
        quadr = pep_gssk_quadrature(a)
        bound = union_bound_gssk(cb, closed.value)
        user_bounds = [
            ber_bound_noma_user(m, cfg, const, snr)
            for m in range(1, cfg.n_noma_users + 1)
        ]
        overall = ber_overall(bound.clamped, [min(b, 1.0) for b in user_bounds])
        table.add(snr_db, "pep_closed_form", closed.value, scenario=tag)
        table.add(snr_db, "pep_quadrature", quadr.value, scenario=tag)
        table.add(snr_db, "union_bound", bound.raw, scenario=tag)
        table.add(snr_db, "union_bound_clamped", bound.clamped, scenario=tag)
        for m, b in enumerate(user_bounds, start=1):
            table.add(snr_db, f"ber_bound_user_{m}", b, scenario=tag)
        table.add(snr_db, "ber_overall_noma", overall.noma_raw, scenario=tag)
        table.add(snr_db, "ber_overall_system", overall.system_raw, scenario=tag)
        table.add(
            snr_db,
            "r_gssk_bound_based",
            (1.0 - bound.clamped) * cb.bits_per_symbol,
            scenario=tag,
        )
        for m in range(1, cfg.n_noma_users + 1):
            table.add(snr_db, f"r_user_{m}", rate_noma_user(m, cfg, snr), scenario=tag)
    table.to_csv(args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    detector = {"energy": "energy_ml", "ideal": "ideal_ml"}[args.detector]
    tag = f"Nt={cfg.n_transmit} nt={cfg.n_active} M={cfg.n_noma_users} {args.detector}"
    table = CurveTable()
    for snr_db in cfg.snr_grid_db:
        res = run_gssk_ber(cfg, detector, snr_db, workers=args.workers)
        table.add(snr_db, "sim_gssk_ber", res.bit.ber, res.bit.ci_low, res.bit.ci_high, tag)
        table.add(
            snr_db, "sim_gssk_ser", res.symbol.ber, res.symbol.ci_low, res.symbol.ci_high, tag
        )
        table.add(
            snr_db,
            "sim_r_gssk",
            (1.0 - res.bit.ber) * cb.bits_per_symbol,
            scenario=tag,
        )
        for m, est in enumerate(
            run_noma_ber(cfg, snr_db, "estimated", workers=args.workers), start=1
        ):
            table.add(snr_db, f"sim_noma_ber_user_{m}", est.ber, est.ci_low, est.ci_high, tag)
    table.to_csv(args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return EXIT_OK


def cmd_figure(args) -> int:
    if args.id not in FIGURE_IDS:
        raise ConfigError(f"unknown figure: {args.id}")
    manifest = run_figure(
        args.id, args.out, trials=args.trials, seed=args.seed, workers=args.workers
    )
    print(f"wrote {manifest}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    n_transmits = [int(v) for v in args.nt.split(",")]
    n_actives = [int(v) for v in args.nt_active.split(",")]
    table = CurveTable()
    for n_active in n_actives:
        for n_transmit in n_transmits:
            run_cfg = validate_config(
                replace(cfg, n_transmit=n_transmit, n_active=n_active)
            )
            curves = run_rate_curves(
                run_cfg, [args.snr_db], workers=args.workers,
                scenario=f"Nt={n_transmit} nt={n_active}",
            )
            table.rows.extend(curves.rows)
    table.to_csv(args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ngssk",
        description="Hybrid NOMA-GSSK link simulator and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--config", required=True, help="scenario file (key = value)")
        if needs_out:
            p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="override scenario seed")
        p.add_argument("--trials", type=int, default=None, help="trials per SNR point")
        p.add_argument("--snr-grid", default=None, help='dB grid as "a:step:b"')
        p.add_argument("--workers", type=int, default=1, help="worker threads")

    p = sub.add_parser("validate", help="parse and validate a scenario file")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("analyze", help="write analytical curves over the SNR grid")
    add_common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="write simulated BER curves with CIs")
    add_common(p)
    p.add_argument("--detector", choices=("energy", "ideal"), default="energy")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("figure", help="run a built-in figure recipe")
    p.add_argument("--id", type=int, required=True, help="figure id (3-6)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("sweep", help="spectral-efficiency sweep over antenna counts")
    add_common(p)
    p.add_argument("--nt", default="2,3,4,5,6,7,8", help="comma list of antenna counts")
    p.add_argument("--nt-active", default="1,2", help="comma list of active counts")
    p.add_argument("--snr-db", type=float, default=SWEEP_SNR_DB)
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
