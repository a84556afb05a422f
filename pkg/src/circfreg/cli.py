"""Command-line harness: simulate / estimate / mc-risk / rates.

Exit codes: 0 on success, 2 on configuration errors (including unwritable
output directories), 3 on numeric failures.  Every output CSV starts with a
single comment line echoing the full configuration and artifact version.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import CoefVector
from .config import ConfigError, build_config, config_echo, _parse_raw
from .datagen import simulate, write_sample_csv
from .estimator import estimate_beta, select_data_driven, select_known, write_trace_csv
from .risk import (
    NumericError,
    experiment_plans,
    replicate_moments,
    run_experiment,
    write_risk_csv,
)
from .sequences import (
    balance_m_dagger,
    balance_m_star,
    bound_M,
    bound_N,
    intrinsic_scales,
    theoretical_rate,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circfreg",
        description="Adaptive series estimation for circular functional regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "write one simulated sample CSV per grid size",
        "estimate": "write selection traces and estimated coefficients",
        "mc-risk": "run the replicated Monte Carlo risk experiment",
        "rates": "tabulate deterministic bounds, balancing indices and rates",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="path to a key = value config file")
        cmd.add_argument("--out", default=None, help="output directory (overrides out_dir)")
        cmd.add_argument("--workers", type=int, default=1, help="worker process count")
        cmd.add_argument(
            "--override", action="append", default=[], metavar="KEY=VALUE",
            help="config override applied after the file is parsed (repeatable)",
        )
    return parser


def _load_config(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config file: {exc}"])
    raw = _parse_raw(text)
    for item in args.override:
        if "=" not in item:
            raise ConfigError([f"override must look like KEY=VALUE, got {item!r}"])
        key, value = (part.strip() for part in item.split("=", 1))
        raw[key] = value
    if args.out is not None:
        raw["out_dir"] = args.out
    return build_config(raw)


def _prepare_out_dir(cfg) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory is not writable: {out}")
    return out


def _cmd_simulate(cfg, out: Path, echo: str) -> None:
    plans = experiment_plans(cfg)
    for plan in plans:
        slope = CoefVector(plan.beta[: plan.n_coef])
        sample = simulate(
            plan.seq, slope, plan.n, cfg.sigma, cfg.seed,
            replicate=(plan.n, 0), n_coef=plan.n_coef,
        )
        write_sample_csv(sample, out / f"sample_n{plan.n}.csv", echo)


def _cmd_estimate(cfg, out: Path, echo: str) -> None:
    plans = experiment_plans(cfg)
    for plan in plans:
        for r in range(cfg.replications):
            mom = replicate_moments(plan, r)
            for variant in plan.variants:
                if variant == "known_degree":
                    trace = select_known(
                        mom, plan.weights, plan.scales_prefix,
                        plan.m_bound_known, cfg.eta, cfg.pen_const_known,
                    )
                else:
                    trace = select_data_driven(
                        mom, plan.weights, cfg.eta, cfg.pen_const_unknown
                    )
                stem = f"{variant}_n{plan.n}_r{r}"
                write_trace_csv(trace, out / f"trace_{stem}.csv", echo)
                beta_hat = estimate_beta(mom, trace.m_hat)
                with open(out / f"betahat_{stem}.csv", "w", newline="") as fh:
                    fh.write(f"# {echo} | variant={variant} n={plan.n} r={r}\n")
                    fh.write("j,coef\n")
                    for j, value in enumerate(beta_hat.coefs, start=1):
                        fh.write(f"{j},{repr(float(value))}\n")


def _cmd_mc_risk(cfg, out: Path, echo: str, workers: int) -> None:
    reports = run_experiment(cfg, workers=workers)
    write_risk_csv(reports, out / "risk_report.csv", echo)


def _cmd_rates(cfg, out: Path, echo: str) -> None:
    seq = cfg.sequence_spec()
    n_max = max(cfg.n_grid)
    scales = intrinsic_scales(seq, n_max)
    with open(out / "rates.csv", "w", newline="") as fh:
        fh.write(f"# {echo}\n")
        fh.write("n,M_n,N_n,m_star,m_dagger,theoretical_rate\n")
        for n in cfg.n_grid:
            rate = theoretical_rate(seq, n) if n >= 3 else float("nan")
            fh.write(
                f"{n},{bound_M(seq, scales, n)},{bound_N(seq, n)},"
                f"{balance_m_star(seq, n)},{balance_m_dagger(seq, scales, n)},"
                f"{repr(rate)}\n"
            )
    with open(out / "scales.csv", "w", newline="") as fh:
        fh.write(f"# {echo}\n")
        fh.write("m,delta,Delta,kappa\n")
        for i in range(n_max):
            fh.write(
                f"{i + 1},{repr(float(scales.delta[i]))},"
                f"{repr(float(scales.Delta[i]))},{repr(float(scales.kappa[i]))}\n"
            )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        out = _prepare_out_dir(cfg)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    echo = f"circfreg v{__version__} | {config_echo(cfg)}"
    try:
        if args.command == "simulate":
            _cmd_simulate(cfg, out, echo)
        elif args.command == "estimate":
            _cmd_estimate(cfg, out, echo)
        elif args.command == "mc-risk":
            _cmd_mc_risk(cfg, out, echo, args.workers)
        else:
            _cmd_rates(cfg, out, echo)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
