"""CSV readers and writers for stream inputs, interval outputs and plot data."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

INPUT_COLUMNS = ("t", "y", "mu_hat")
OUTPUT_COLUMNS = ("t", "y", "mu_hat", "lower", "upper", "covered", "theta", "width")
PLOT_SERIES = ("y", "lower", "upper", "prediction", "width")

FLUSIGHT_COLUMNS = ("model_name", "Target", "Location", "Year", "Model.Week", "Season", "Value", "obs_value")
FLUSIGHT_EXCLUDED = (
    "Delphi_Uniform", "CUBMA",
    "CU_EAKFC_SIRS", "CU_EKF_SEIRS", "CU_EKF_SIRS", "CU_RHF_SEIRS", "CU_RHF_SIRS",
)


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class OutputRecord:
    t: int
    y: float
    mu_hat: float
    lower: float
    upper: float
    covered: int
    theta: float
    width: float


def _format(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    # repr round-trips floats exactly
    return repr(float(value))


def write_intervals_csv(path, records):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OUTPUT_COLUMNS)
        for rec in records:
            writer.writerow([_format(getattr(rec, name)) for name in OUTPUT_COLUMNS])


def read_intervals_csv(path) -> list[OutputRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in OUTPUT_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        out = []
        for row in reader:
            out.append(OutputRecord(
                t=int(row["t"]), y=float(row["y"]), mu_hat=float(row["mu_hat"]),
                lower=float(row["lower"]), upper=float(row["upper"]), covered=int(row["covered"]),
                theta=float(row["theta"]), width=float(row["width"]),
            ))
    return out


def read_input_csv(path) -> dict:
    """Read ``t,y,mu_hat[,group]`` rows, grouped by the optional ``group`` column.

    Returns ``{group: DataFrame}``; the key is ``None`` when there is no group
    column. Rows must be strictly increasing in ``t`` within each group.
    """
    try:
        df = pd.read_csv(path, dtype={"group": str}, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in INPUT_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    for col in INPUT_COLUMNS:
        df[col] = pd.to_numeric(df[col], errors="coerce")
    bad = df[list(INPUT_COLUMNS)].isna().any(axis=1) | ~np.isfinite(df[["y", "mu_hat"]]).all(axis=1)
    if bad.any():
        raise DataError(f"{path}: non-numeric or non-finite values on data row(s) "
                        f"{', '.join(str(i + 1) for i in np.flatnonzero(bad)[:5])}")
    groups = {}
    if "group" in df.columns:
        for key, g in df.groupby("group", sort=True):
            groups[key] = g.reset_index(drop=True)
    else:
        groups[None] = df
    for key, g in groups.items():
        if len(g) == 0:
            raise DataError(f"{path}: group {key!r} has no rows")
        if np.any(np.diff(g["t"].to_numpy()) <= 0):
            label = "" if key is None else f" in group {key!r}"
            raise DataError(f"{path}: t is not strictly increasing{label}")
    return groups


def read_flusight_csv(path) -> dict:
    """Read a local FluSight point-estimate file.

    Keeps one-week-ahead US national forecasts, drops the excluded and
    duplicate models, sorts by ``(Year, Model.Week)`` and groups by model.
    Each group is a DataFrame with ``t, y, mu_hat, Season`` columns
    (``y = obs_value``, ``mu_hat = Value``).
    """
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for col in FLUSIGHT_COLUMNS:
        if col not in df.columns:
            raise DataError(f"{path}: missing column {col!r}")
    df = df[(df["Target"] == "1 wk ahead") & (df["Location"] == "US National")]
    df = df[~df["model_name"].isin(FLUSIGHT_EXCLUDED)]
    df = df.sort_values(["Year", "Model.Week"], kind="mergesort")
    groups = {}
    for name, g in df.groupby("model_name", sort=True):
        g = g.reset_index(drop=True)
        groups[name] = pd.DataFrame({
            "t": np.arange(1, len(g) + 1),
            "y": g["obs_value"].astype(float).to_numpy(),
            "mu_hat": g["Value"].astype(float).to_numpy(),
            "Season": g["Season"].astype(str).to_numpy(),
        })
    if not groups:
        log.warning("%s: no forecasts left after filtering", path)
    return groups


def plot_rows(records):
    """Long-format ``(t, series, value)`` rows, five per time step."""
    rows = []
    for rec in records:
        values = {"y": rec.y, "lower": rec.lower, "upper": rec.upper, "prediction": rec.mu_hat,
                  "width": rec.width}
        rows.extend((rec.t, s, values[s]) for s in PLOT_SERIES)
    return rows


def write_plotdata_csv(path, records):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "series", "value"))
        for t, series, value in plot_rows(records):
            writer.writerow((t, series, _format(value)))
