"""Command-line front end: tables as CSV or JSON.

Exit codes: 0 success, 1 validation failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .checks import CHECKS, run_checks
from .damping_response import var_X_damped
from .estimation import LINEAR_REGIME_KAPPA, RunConfig, empirical_mse
from .observables import DEFAULT_GRID_POINTS, mean_var_P, mean_var_X
from .optimizer import improvement_curve, minimize_mse, solve_x0
from .probes import ProbeClass, ProbeSpec, make_probe

DEFAULT_SEED = 20070101

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(value):
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.12g}"
    return str(value)


def _json_value(value):
    if isinstance(value, (np.floating, float)):
        return None if math.isnan(value) else float(f"{float(value):.12g}")
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        clean = [{k: _json_value(v) for k, v in row.items()} for row in rows]
        return json.dumps(clean, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0]) if rows else []
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def _grid(lo: float, hi: float, step: float, name: str) -> np.ndarray:
    if step <= 0 or hi < lo:
        raise UsageError(f"bad {name} range [{lo}, {hi}] step {step}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 12)


def cmd_variance_curve(args) -> tuple[list[dict], int]:
    if args.alpha_min < 0:
        raise UsageError("alpha must be nonnegative")
    rows = []
    for alpha in _grid(args.alpha_min, args.alpha_max, args.alpha_step, "alpha"):
        one = make_probe(ProbeSpec(ProbeClass.I, alpha, 0.0))
        two = make_probe(ProbeSpec(ProbeClass.II, alpha, 0.0))
        rows.append(
            {
                "alpha": float(alpha),
                "var_X": mean_var_X(one)[1],
                "var_P_classI": mean_var_P(one)[1],
                "var_P_classII": mean_var_P(two)[1],
            }
        )
    return rows, EXIT_OK


def cmd_damping_curve(args) -> tuple[list[dict], int]:
    kappas = _grid(0.0, args.kappa_max, args.kappa_step, "kappa")
    var_i = var_X_damped(ProbeClass.I, args.alpha, kappas)
    var_ii = var_X_damped(ProbeClass.II, args.alpha, kappas)
    rows = [{"kappa": float(k), "var_I": float(a), "var_II": float(b)} for k, a, b in zip(kappas, var_i, var_ii)]
    return rows, EXIT_OK


def cmd_improvement(args) -> tuple[list[dict], int]:
    if args.n_tot_min <= 0:
        raise UsageError("n_tot must be positive")
    rows = []
    for n_tot in _grid(args.n_tot_min, args.n_tot_max, args.n_tot_step, "n_tot"):
        row = {"n_tot": float(n_tot)}
        try:
            (point,) = improvement_curve([float(n_tot)], args.kappa)
        except ValueError:
            row.update(delta_I=float("nan"), delta_II=float("nan"), feasible=False)
            rows.append(row)
            continue
        row.update(delta_I=point.delta_I, delta_II=point.delta_II, feasible=True)
        for opt in point.optima:
            tag = opt.probe_class.value
            row.update(
                {
                    f"alpha_{tag}": opt.alpha_star,
                    f"x0_{tag}": opt.x0_star,
                    f"n_meas_{tag}": opt.n_meas_star,
                    f"mse_{tag}": opt.mse_star,
                }
            )
        rows.append(row)
    return rows, EXIT_OK


def cmd_optimize(args) -> tuple[list[dict], int]:
    try:
        opt = minimize_mse(args.probe_class, args.n_tot, args.kappa)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return [], EXIT_FAIL
    row = {
        "class": opt.probe_class.value,
        "n_tot": args.n_tot,
        "kappa": args.kappa,
        "alpha_star": opt.alpha_star,
        "x0_star": opt.x0_star,
        "n_meas_star": opt.n_meas_star,
        "mse_star": opt.mse_star,
    }
    return [row], EXIT_OK


def build_run_config(args) -> RunConfig:
    cls = ProbeClass(args.probe_class)
    if cls.is_classical:
        alpha, n_meas = 0.0, args.n_meas or 1
    elif args.alpha is None:
        opt = minimize_mse(cls, args.n_tot, args.kappa)
        alpha, n_meas = opt.alpha_star, args.n_meas or opt.n_meas_star
    else:
        alpha, n_meas = args.alpha, args.n_meas or 1
    x0 = solve_x0(cls, alpha, args.n_tot, n_meas)
    if x0 is None:
        raise UsageError(f"infeasible budget: n_tot={args.n_tot} leaves no photons for the displacement")
    return RunConfig(
        spec=ProbeSpec(cls, alpha, x0),
        kappa_true=args.kappa,
        n_tot=args.n_tot,
        n_meas=n_meas,
        runs=args.runs,
        seed=args.seed,
        grid_points=args.grid_points,
    )


def cmd_simulate(args) -> tuple[list[dict], int]:
    try:
        config = build_run_config(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.kappa > LINEAR_REGIME_KAPPA and not args.no_warn:
        print(
            f"warning: kappa={args.kappa} is outside the linearization regime (kappa <= {LINEAR_REGIME_KAPPA})",
            file=sys.stderr,
        )
    report = empirical_mse(config)
    row = {
        "class": config.spec.probe_class.value,
        "alpha": config.spec.alpha,
        "x0": config.spec.x0,
        "n_meas": config.n_meas,
        "n_tot": config.n_tot,
        "kappa": config.kappa_true,
        "runs": report.runs,
        "seed": config.seed,
        "analytic_mse": report.analytic_mse,
        "empirical_mse": report.empirical_mse,
        "empirical_stderr": report.empirical_stderr,
        "mean_estimate": report.mean_estimate,
        "consistent": report.consistent,
    }
    return [row], EXIT_OK if report.consistent else EXIT_FAIL


def cmd_oracle_check(args) -> tuple[list[dict], int]:
    if args.cutoff is not None and args.cutoff > 120:
        raise UsageError("cutoff above 120 exceeds the memory budget")
    results = run_checks(args.check, args.cutoff)
    rows = [
        {"check": r.name, "passed": r.passed, "deviation": r.deviation, "tolerance": r.tolerance, "detail": r.detail}
        for r in results
    ]
    return rows, EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="default: json for simulate, csv otherwise")

    parser = argparse.ArgumentParser(prog="dampest", description="Damping-constant estimation with cat-state probes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("variance-curve", parents=[common], help="X and P variances versus alpha")
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=4.0)
    p.add_argument("--alpha-step", type=float, default=0.01)
    p.set_defaults(func=cmd_variance_curve)

    p = sub.add_parser("damping-curve", parents=[common], help="damped X variance of classes I and II")
    p.add_argument("--alpha", type=float, default=1.6)
    p.add_argument("--kappa-max", type=float, default=5.0)
    p.add_argument("--kappa-step", type=float, default=0.05)
    p.set_defaults(func=cmd_damping_curve)

    p = sub.add_parser("improvement", parents=[common], help="relative improvement over classical probes")
    p.add_argument("--n-tot-min", type=float, default=1.0)
    p.add_argument("--n-tot-max", type=float, default=20.0)
    p.add_argument("--n-tot-step", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.01)
    p.set_defaults(func=cmd_improvement)

    p = sub.add_parser("optimize", parents=[common], help="optimal probe for one class")
    p.add_argument("--class", dest="probe_class", choices=[c.value for c in ProbeClass], default="I")
    p.add_argument("--n-tot", type=float, default=20.0)
    p.add_argument("--kappa", type=float, default=0.01)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the estimation error")
    p.add_argument("--class", dest="probe_class", choices=[c.value for c in ProbeClass], default="I")
    p.add_argument("--alpha", type=float, default=None, help="default: optimizer's choice")
    p.add_argument("--n-tot", type=float, default=20.0)
    p.add_argument("--n-meas", type=int, default=None)
    p.add_argument("--kappa", type=float, default=0.01)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--no-warn", action="store_true", help="silence the linearization-regime warning")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-check", parents=[common], help="Fock-space cross-checks")
    p.add_argument("--check", action="append", choices=list(CHECKS), help="run only this check (repeatable)")
    p.add_argument("--cutoff", type=int, default=None, help="Fock dimension per mode for every check")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def _validate(args):
    for name in ("kappa", "kappa_max"):
        if getattr(args, name, 0) is not None and getattr(args, name, 0) < 0:
            raise UsageError(f"--{name.replace('_', '-')} must be nonnegative")
    for name in ("runs", "grid_points", "n_tot"):
        value = getattr(args, name, 1)
        if value is not None and value <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "n_meas", None) is not None and args.n_meas < 1:
        raise UsageError("--n-meas must be >= 1")
    if getattr(args, "cutoff", None) is not None and args.cutoff < 2:
        raise UsageError("--cutoff must be >= 2")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        rows, status = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("json" if args.func is cmd_simulate else "csv")
    text = render(rows, fmt)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
