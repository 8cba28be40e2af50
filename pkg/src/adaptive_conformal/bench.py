"""Simulation-study runners: one cell is (seed, method, alpha, param)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .core import DEFAULT_GAMMA_GRID, RunConfig, default_constructor
from .metrics import report_from_steps
from .simgen import ArmaSpec, FriedmanSpec, ShiftSpec, estimate_D, gen_friedman, gen_shift_stream, ridge_predictions

STUDIES = ("arma", "shift")
BENCH_METHODS = ("AgACI", "FACI", "SF-OGD", "SAOCP")
DEFAULT_PARAMS = {"arma": (0.1, 0.8, 0.9, 0.95, 0.99), "shift": (0.0, 0.5)}
METRIC_COLUMNS = ("empirical_coverage", "coverage_error", "mean_width", "infinite_width_count",
                  "path_length", "regret")


@dataclass(frozen=True)
class Cell:
    study: str
    seed: int
    method: str
    alpha: float
    param: float
    sa_windows: tuple = ()
    predictor: str = "oracle"


def method_config(method, alpha, D, linear_grid):
    """Per-method settings used by both studies.

    Each method uses the constructor it was introduced with. Linear methods
    get ``gamma = D / sqrt(3)`` and a linear-scale candidate grid; quantile
    methods keep the default doubling grid.
    """
    constructor = default_constructor(method)
    grid = linear_grid if constructor == "linear" else DEFAULT_GAMMA_GRID
    gamma = D / math.sqrt(3)
    if method == "ACI" and constructor == "quantile":
        gamma = 0.01
    return RunConfig(method=method, alpha=alpha, constructor=constructor, gamma=gamma, D=D,
                     gamma_grid=grid)


def _run(config, y, mu_hat):
    est = config.build()
    est.fit(y, mu_hat)
    return est


def run_shift_cell(cell: Cell, length=500, warmup=50):
    mu_hat, y = gen_shift_stream(ShiftSpec(length=length, shift_delta=cell.param, shift_point=length // 2),
                                 cell.seed)
    if default_constructor(cell.method) == "linear":
        D = estimate_D(y - mu_hat, (1, warmup))
    else:
        D = 1.0
    config = method_config(cell.method, cell.alpha, D, tuple(np.round(np.arange(1, 21) * 0.1, 10)))
    est = _run(config, y, mu_hat)
    report = report_from_steps(est.steps_, cell.alpha, (warmup + 1, length), cell.sa_windows)
    return report, D, est


def run_arma_cell(cell: Cell, length=600, calib=(200, 249), start=250, eval_from=300):
    data = gen_friedman(FriedmanSpec(length=length), ArmaSpec(cell.param, cell.param, length=length), cell.seed)
    if cell.predictor == "oracle":
        preds = data.mean
    elif cell.predictor == "ridge":
        preds = ridge_predictions(data.X, data.y)
    else:
        raise ValueError(f"unknown predictor {cell.predictor!r}")
    D = estimate_D(data.y - preds, calib)
    config = method_config(cell.method, cell.alpha, D, tuple(np.round(np.arange(1, 11) * 0.1, 10)))
    est = _run(config, data.y[start - 1:], preds[start - 1:])
    n = length - start + 1
    report = report_from_steps(est.steps_, cell.alpha, (eval_from - start + 1, n), cell.sa_windows)
    return report, D, est


def run_cell(cell: Cell) -> dict:
    runner = run_arma_cell if cell.study == "arma" else run_shift_cell
    report, D, _ = runner(cell)
    row = {"study": cell.study, "seed": cell.seed, "method": cell.method, "alpha": cell.alpha,
           "param": cell.param, "D": D}
    row.update(report.to_dict())
    return row


def resolve_workers(workers):
    env = os.environ.get("CONFORMAL_WORKERS")
    if env:
        workers = int(env)
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers}")
    return workers


def run_study(study: str, methods: Sequence[str] = BENCH_METHODS, alphas: Sequence[float] = (0.9,),
              seeds: Sequence[int] = range(1, 51), params: Sequence[float] | None = None,
              workers: int = 1, sa_windows: Sequence[int] = (), predictor: str = "oracle") -> pd.DataFrame:
    """Run every (seed, method, alpha, param) cell and return one row per cell.

    Rows are sorted by cell key, so the output does not depend on the order
    in which workers finish.
    """
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}; expected one of {STUDIES}")
    params = DEFAULT_PARAMS[study] if params is None else params
    cells = [Cell(study, int(s), m, float(a), float(p), tuple(sa_windows), predictor)
             for s in seeds for m in methods for a in alphas for p in params]
    workers = resolve_workers(workers)
    if workers == 1:
        rows = [run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells, chunksize=max(1, len(cells) // (4 * workers))))
    df = pd.DataFrame(rows)
    return df.sort_values(["method", "alpha", "param", "seed"], kind="mergesort").reset_index(drop=True)


def aggregate(df: pd.DataFrame) -> pd.DataFrame:
    """Mean and 10%/90% quantiles of every metric per (method, alpha, param) cell."""
    metrics = [c for c in df.columns if c in METRIC_COLUMNS or c.startswith("sa_regret.")]
    rows = []
    for (method, alpha, param), group in df.groupby(["method", "alpha", "param"], sort=True):
        row = {"method": method, "alpha": alpha, "param": param, "n_seeds": len(group)}
        for m in metrics:
            values = pd.to_numeric(group[m], errors="coerce").to_numpy(dtype=float)
            values = values[np.isfinite(values)]
            if values.size:
                row[f"{m}.mean"] = float(values.mean())
                row[f"{m}.q10"] = float(np.quantile(values, 0.1))
                row[f"{m}.q90"] = float(np.quantile(values, 0.9))
            else:
                row[f"{m}.mean"] = row[f"{m}.q10"] = row[f"{m}.q90"] = math.nan
        rows.append(row)
    return pd.DataFrame(rows)
