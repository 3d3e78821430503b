"""Command-line interface.

Subcommands:
  analytic   evaluate one closed form from flags
  simulate   run one scenario config through the object pipeline, write CSV
  sweep      reproduce the standard figure sweeps (1a, 1b, a1), write CSV
  validate   run the oracle-vs-analytic suite; exit nonzero on failure
"""

from __future__ import annotations

import argparse
import sys

from . import estimands, harness, validation
from .params import DurationModelParams, SymptomModelParams

_FORMS = ("symptom-target-mu", "symptom-actual-mu", "invert-nu",
          "infrequent-target-mu", "sampling-fraction",
          "infrequent-observed-component", "infrequent-observed-mu")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="scenario config file")
    parser.add_argument("--seed", type=int, help="override the RNG seed")
    parser.add_argument("--units", type=int, help="override units per arm")
    parser.add_argument("--out", metavar="PATH", help="override the output CSV path")
    parser.add_argument("--threads", type=int, help="override the worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarbias",
        description="Quantify testing-strategy bias in VE-vs-SAR estimates")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analytic", help="evaluate a closed form")
    p_an.add_argument("--form", choices=_FORMS, required=True)
    p_an.add_argument("--lambda-symptom", type=float, default=0.2)
    p_an.add_argument("--delta", type=float, default=0.5)
    p_an.add_argument("--nu", type=float, default=0.6)
    p_an.add_argument("--rho-symptom", type=float, default=0.5)
    p_an.add_argument("--tau", type=float, default=0.3)
    p_an.add_argument("--target-ve", type=float, default=0.5)
    p_an.add_argument("--k", type=float, default=7.0)
    p_an.add_argument("--rho0", type=float, default=14.0)
    p_an.add_argument("--rho1", type=float, default=8.0)
    p_an.add_argument("--c", type=float, default=7.0)
    p_an.add_argument("--nu-daily", type=float, default=0.7)
    p_an.add_argument("--tau0", type=float, default=0.01)
    p_an.add_argument("--rho-v", type=float, default=8.0)
    p_an.add_argument("--tau-v", type=float, default=0.01)

    p_sim = sub.add_parser("simulate", help="run one scenario to CSV")
    _add_common(p_sim)

    p_sweep = sub.add_parser("sweep", help="reproduce a figure sweep to CSV")
    p_sweep.add_argument("--figure", choices=("1a", "1b", "a1"), required=True)
    _add_common(p_sweep)

    p_val = sub.add_parser("validate", help="oracle-vs-analytic suite")
    p_val.add_argument("--units", type=int, default=1_000_000)
    p_val.add_argument("--seed", type=int, default=1)
    p_val.add_argument("--threads", type=int, default=1)
    return parser


def _run_analytic(args: argparse.Namespace) -> int:
    s = SymptomModelParams(lambda_symptom=args.lambda_symptom, delta=args.delta,
                           nu=args.nu, rho_symptom=args.rho_symptom, tau=args.tau)
    d = DurationModelParams(rho0=args.rho0, rho1=args.rho1, c=args.c,
                            nu_daily=args.nu_daily, tau0=args.tau0)
    form = args.form
    if form == "symptom-target-mu":
        value = estimands.symptom_prompted_target_mu(s)
    elif form == "symptom-actual-mu":
        value = estimands.symptom_prompted_actual_mu(s)
    elif form == "invert-nu":
        value = estimands.invert_target_to_nu(args.target_ve, args.lambda_symptom,
                                              args.delta, args.rho_symptom)
    elif form == "infrequent-target-mu":
        value = estimands.infrequent_target_mu(d)
    elif form == "sampling-fraction":
        value = estimands.sampling_fraction(args.k, args.rho_v, args.c)
    elif form == "infrequent-observed-component":
        value = estimands.infrequent_observed_component(args.k, args.rho_v,
                                                        args.c, args.tau_v)
    else:
        value = estimands.infrequent_observed_mu(args.k, d)
    print(harness.fmt12(value))
    return 0


def _apply_overrides(cfg: harness.ScenarioConfig,
                     args: argparse.Namespace) -> harness.ScenarioConfig:
    from dataclasses import replace
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.units is not None:
        kwargs["units_per_arm"] = args.units
    if args.out is not None:
        kwargs["out_path"] = args.out
    if args.threads is not None:
        kwargs["threads"] = args.threads
    return replace(cfg, **kwargs) if kwargs else cfg


def _run_simulate(args: argparse.Namespace) -> int:
    if not args.config:
        print("simulate requires --config PATH", file=sys.stderr)
        return 2
    try:
        cfg = harness.load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out_path:
        print("no output path: set scenario.out or pass --out", file=sys.stderr)
        return 2
    rows = harness.run_scenario(cfg)
    harness.write_csv(rows, cfg.out_path)
    print(f"wrote {len(rows)} rows to {cfg.out_path}")
    return 0


def _run_sweep(args: argparse.Namespace) -> int:
    symptom = None
    duration = None
    seed = args.seed if args.seed is not None else 0
    units = args.units if args.units is not None else 0
    threads = args.threads if args.threads is not None else 1
    out = args.out
    if args.config:
        try:
            cfg = harness.load_config(args.config)
        except harness.ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        symptom, duration = cfg.unit.symptom, cfg.unit.duration
        if args.seed is None:
            seed = cfg.seed
        if args.units is None:
            units = cfg.units_per_arm
        if args.threads is None:
            threads = cfg.threads
        if out is None:
            out = cfg.out_path
    if not out:
        print("no output path: pass --out (or scenario.out in --config)",
              file=sys.stderr)
        return 2
    if args.figure == "1a":
        rows = harness.sweep_figure_1a(symptom_base=symptom, units_per_arm=units,
                                       seed=seed, threads=threads)
    else:
        rows = harness.sweep_figure_1b_a1(
            duration_base=duration, units_per_arm=units, seed=seed,
            threads=threads, restrict_to_short_intervals=args.figure == "1b")
    harness.write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analytic":
        try:
            return _run_analytic(args)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    if args.command == "simulate":
        return _run_simulate(args)
    if args.command == "sweep":
        return _run_sweep(args)
    ok = validation.main_validation(units_per_arm=args.units, seed=args.seed,
                                    threads=args.threads)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
