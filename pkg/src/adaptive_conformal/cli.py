"""Command-line front end: ``adaptive-conformal {run,bench,plotdata}``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .bench import BENCH_METHODS, DEFAULT_PARAMS, STUDIES, aggregate, run_study
from .core import CONSTRUCTORS, DEFAULT_LIFETIME_MULTIPLIER, DEFAULT_INTERVAL_LENGTH, METHODS, RunConfig
from .io import (
    DataError, OutputRecord, read_flusight_csv, read_input_csv, read_intervals_csv, write_intervals_csv,
    write_plotdata_csv,
)
from .metrics import MetricError, run_report
from .simgen import estimate_D

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("adaptive_conformal")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _span(text):
    m = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected start:end, got {text!r}")
    start, end = int(m.group(1)), int(m.group(2))
    if start < 1 or start > end:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy 1 <= start <= end")
    return start, end


def build_parser():
    parser = _Parser(prog="adaptive-conformal", description="Adaptive conformal prediction intervals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one method over a CSV of outcomes and point predictions")
    run.add_argument("--input", required=True, type=Path, help="CSV with t,y,mu_hat[,group]")
    run.add_argument("--format", choices=("generic", "flusight"), default="generic",
                     help="input layout; 'flusight' reads a point-estimate file grouped by model")
    run.add_argument("--method", required=True, choices=METHODS)
    run.add_argument("--alpha", required=True, type=float, help="target coverage in (0, 1)")
    run.add_argument("--constructor", choices=CONSTRUCTORS,
                     help="interval constructor (default: linear for SF-OGD/SAOCP, quantile otherwise)")
    run.add_argument("--gamma", type=float, help="learning rate (ACI, SF-OGD, SAOCP)")
    run.add_argument("--gamma-grid", type=_float_list, help="candidate learning rates (AgACI, FACI)")
    d = run.add_mutually_exclusive_group()
    d.add_argument("--D", type=float, dest="D", help="maximum radius bound")
    d.add_argument("--calibrate-D", type=_span, dest="calibrate_D", metavar="START:END",
                   help="set D to max |y - mu_hat| over these 1-based rows")
    run.add_argument("--theta1", type=float, help="initial parameter")
    run.add_argument("--lifetime-g", type=int, default=DEFAULT_LIFETIME_MULTIPLIER,
                     help="SAOCP lifetime multiplier")
    run.add_argument("--interval-length", type=int, default=DEFAULT_INTERVAL_LENGTH,
                     help="FACI loss-window length")
    run.add_argument("--eval-range", type=_span, metavar="START:END",
                     help="1-based rows used for metrics (default: all)")
    run.add_argument("--sa-windows", type=_int_list, default=(), help="window lengths for strongly adaptive regret")
    run.add_argument("--log-transform", action="store_true",
                     help="run on log(y) and log(mu_hat) and exponentiate the bounds")
    run.add_argument("--out", required=True, type=Path, help="output directory")

    bench = sub.add_parser("bench", help="run a simulation study")
    bench.add_argument("--study", required=True, choices=STUDIES)
    bench.add_argument("--methods", type=_str_list, default=BENCH_METHODS)
    bench.add_argument("--alphas", type=_float_list, default=(0.9,))
    bench.add_argument("--seeds", type=int, default=50, help="use seeds 1..N")
    bench.add_argument("--params", type=_float_list,
                       help="psi values (arma) or shift sizes (shift); defaults depend on the study")
    bench.add_argument("--workers", type=int, default=1, help="overridden by CONFORMAL_WORKERS")
    bench.add_argument("--sa-windows", type=_int_list, default=())
    bench.add_argument("--predictor", choices=("oracle", "ridge"), default="oracle",
                       help="point predictor for the arma study")
    bench.add_argument("--out", required=True, type=Path)

    plot = sub.add_parser("plotdata", help="long-format plot data from a run directory")
    plot.add_argument("run_dir", type=Path)
    plot.add_argument("--out", type=Path, help="output CSV (default: RUN_DIR/plotdata.csv)")
    return parser


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, np.generic):
        return _json_value(v.item())
    return v


def _write_json(path, obj):
    obj = {k: _json_value(v) for k, v in obj.items()}
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _safe_name(name):
    return re.sub(r"[^A-Za-z0-9._-]+", "_", str(name)) or "_"


def _config(args, D):
    kwargs = dict(method=args.method, alpha=args.alpha, constructor=args.constructor, theta1=args.theta1,
                  gamma=args.gamma, D=D, lifetime_multiplier=args.lifetime_g,
                  interval_length=args.interval_length)
    if args.gamma_grid is not None:
        kwargs["gamma_grid"] = args.gamma_grid
    try:
        config = RunConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if config.method in ("SF-OGD", "SAOCP") and config.constructor == "linear" \
            and config.gamma is None and config.D is None and args.calibrate_D is None:
        raise UsageError(f"{config.method} with the linear constructor needs --gamma, --D or --calibrate-D")
    return config


def _run_group(args, frame, out_dir):
    y = frame["y"].to_numpy(dtype=float)
    mu = frame["mu_hat"].to_numpy(dtype=float)
    n = y.size
    if args.log_transform:
        if np.any(y <= 0) or np.any(mu <= 0):
            raise DataError("--log-transform needs strictly positive y and mu_hat")
        y_run, mu_run = np.log(y), np.log(mu)
    else:
        y_run, mu_run = y, mu

    D = args.D
    if args.calibrate_D is not None:
        start, end = args.calibrate_D
        if end > n:
            raise DataError(f"--calibrate-D {start}:{end} is outside the {n} available rows")
        D = estimate_D(y_run - mu_run, (start, end))
    eval_range = args.eval_range or (1, n)
    if eval_range[1] > n:
        raise DataError(f"--eval-range {eval_range[0]}:{eval_range[1]} is outside the {n} available rows")

    est = _config(args, D).build()
    try:
        est.fit(y_run, mu_run)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    lower, upper = est.intervals_[:, 0], est.intervals_[:, 1]
    if args.log_transform:
        with np.errstate(over="ignore"):
            lower, upper = np.exp(lower), np.exp(upper)
    widths = upper - lower
    records = [
        OutputRecord(t=int(t), y=float(yy), mu_hat=float(m), lower=float(lo), upper=float(hi),
                     covered=int(1 - e), theta=float(th), width=float(w))
        for t, yy, m, lo, hi, e, th, w in zip(frame["t"].to_numpy(), y, mu, lower, upper, est.errors_,
                                             est.thetas_, widths)
    ]
    report = run_report(est.errors_, widths, est.thetas_, est.radii_, est.alpha_, eval_range, args.sa_windows)
    metrics = report.to_dict()
    metrics["D"] = getattr(est, "D_", D)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_intervals_csv(out_dir / "intervals.csv", records)
    _write_json(out_dir / "metrics.json", metrics)
    return metrics


def cmd_run(args):
    reader = read_flusight_csv if args.format == "flusight" else read_input_csv
    groups = reader(args.input)
    if not groups:
        raise DataError(f"{args.input}: no rows to process")
    args.out.mkdir(parents=True, exist_ok=True)
    for key, frame in groups.items():
        out_dir = args.out if key is None else args.out / _safe_name(key)
        metrics = _run_group(args, frame, out_dir)
        label = "" if key is None else f"[{key}] "
        cov = metrics["empirical_coverage"]
        print(f"{label}coverage={cov:.4f} mean_width={metrics['mean_width']} -> {out_dir}")
    return EXIT_OK


def cmd_bench(args):
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    unknown = [m for m in args.methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown method(s): {', '.join(unknown)}")
    try:
        df = run_study(args.study, methods=args.methods, alphas=args.alphas, seeds=range(1, args.seeds + 1),
                       params=args.params, workers=args.workers, sa_windows=args.sa_windows,
                       predictor=args.predictor)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    agg = aggregate(df)
    args.out.mkdir(parents=True, exist_ok=True)
    df.to_csv(args.out / "runs.csv", index=False, lineterminator="\n")
    agg.to_csv(args.out / "aggregate.csv", index=False, lineterminator="\n")
    _bench_plotdata(agg).to_csv(args.out / "plotdata.csv", index=False, lineterminator="\n")
    print(f"{len(df)} runs, {len(agg)} cells -> {args.out}")
    return EXIT_OK


def _bench_plotdata(agg):
    """One row per (cell, metric) with mean and 10%/90% quantiles, for error-bar plots."""
    rows = []
    metrics = sorted({c.rsplit(".", 1)[0] for c in agg.columns if c.endswith(".mean")})
    for _, r in agg.iterrows():
        for m in metrics:
            rows.append({"method": r["method"], "alpha": r["alpha"], "param": r["param"], "metric": m,
                         "mean": r[f"{m}.mean"], "q10": r[f"{m}.q10"], "q90": r[f"{m}.q90"]})
    return pd.DataFrame(rows, columns=["method", "alpha", "param", "metric", "mean", "q10", "q90"])


def cmd_plotdata(args):
    if not args.run_dir.is_dir():
        raise DataError(f"run directory {args.run_dir} does not exist")
    src = args.run_dir / "intervals.csv"
    if not src.is_file():
        raise DataError(f"{args.run_dir} has no intervals.csv")
    records = read_intervals_csv(src)
    out = args.out or args.run_dir / "plotdata.csv"
    write_plotdata_csv(out, records)
    print(f"{5 * len(records)} rows -> {out}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "plotdata": cmd_plotdata}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"adaptive-conformal {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, MetricError, OSError) as exc:
        print(f"adaptive-conformal {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
