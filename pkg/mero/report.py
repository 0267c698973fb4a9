"""Aggregate trace files across seeds into mean ± SE tables, slope fits and charts."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from .errors import InvalidArgumentError
from .evaluation.metrics import slope_fit
from .evaluation.trace import FLOAT_FORMAT, read_trace_csv, trace_m
from .svg import write_chart

logger = logging.getLogger(__name__)

AGGREGATE_FILE = "aggregate.csv"
SLOPES_FILE = "slopes.csv"
CHART_METRICS = ("mer", "mwer")


@dataclass
class ReportSummary:
    aggregate: Path
    slopes: Path
    charts: List[Path] = field(default_factory=list)


def metric_columns(m: int) -> List[str]:
    return (
        ["mer", "mwer", "samples_total"]
        + [f"risk_{i}" for i in range(1, m + 1)]
        + [f"excess_{i}" for i in range(1, m + 1)]
        + [f"q_{i}" for i in range(1, m + 1)]
    )


def load_traces(trace_dir: Path) -> pd.DataFrame:
    files = sorted(Path(trace_dir).glob("trace_*.csv"))
    if not files:
        raise FileNotFoundError(f"no trace_*.csv files in {trace_dir}")
    frames = [read_trace_csv(f) for f in files]
    widths = {trace_m(f) for f in frames}
    if len(widths) != 1:
        raise InvalidArgumentError(f"traces in {trace_dir} mix different numbers of distributions: {sorted(widths)}")
    logger.info(f"Loaded {len(files)} trace files from {trace_dir}")
    return pd.concat(frames, ignore_index=True)


def align_grids(frame: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
    """Put every run of one algorithm on the same checkpoints.

    When the runs disagree, all of them are interpolated onto the coarsest grid
    (the one with the fewest checkpoints).
    """
    aligned = []
    for algo, runs in frame.groupby("algo", sort=True):
        grids = {run_id: tuple(sorted(g["t"])) for run_id, g in runs.groupby("run_id")}
        if len(set(grids.values())) == 1:
            aligned.append(runs)
            continue
        coarsest = np.asarray(min(grids.values(), key=lambda g: (len(g), g)), dtype=float)
        logger.warning(f"{algo}: checkpoint grids differ across seeds; resampling onto {len(coarsest)} checkpoints")
        for run_id, g in runs.groupby("run_id"):
            g = g.sort_values("t")
            resampled = {c: np.interp(coarsest, g["t"].to_numpy(float), g[c].to_numpy(float)) for c in columns}
            aligned.append(pd.DataFrame({"run_id": run_id, "algo": algo, "seed": g["seed"].iloc[0], "t": coarsest.astype(int), **resampled}))
    return pd.concat(aligned, ignore_index=True)


def aggregate(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard error across seeds at every (algo, t); one seed gives SE 0."""
    columns = metric_columns(trace_m(frame))
    frame = align_grids(frame, columns)
    grouped = frame.groupby(["algo", "t"], sort=True)[columns]
    mean, std, count = grouped.mean(), grouped.std(ddof=1), grouped.count()
    se = (std / np.sqrt(count)).fillna(0.0)
    out = pd.DataFrame(index=mean.index)
    out["n_seeds"] = count["mer"]
    for c in columns:
        out[f"{c}_mean"] = mean[c]
        out[f"{c}_se"] = se[c]
    return out.reset_index()


def slope_table(agg: pd.DataFrame, t_range=None) -> pd.DataFrame:
    rows = []
    for algo, g in agg.groupby("algo", sort=True):
        for metric in CHART_METRICS:
            try:
                slope = slope_fit(g["t"].to_numpy(float), g[f"{metric}_mean"].to_numpy(float), t_range)
            except InvalidArgumentError as e:
                logger.warning(f"{algo}/{metric}: no slope ({e})")
                slope = float("nan")
            rows.append({
                "algo": algo,
                "metric": metric,
                "slope": slope,
                "t_min": int(g["t"].min()),
                "t_max": int(g["t"].max()),
                "points": len(g),
            })
    return pd.DataFrame(rows, columns=["algo", "metric", "slope", "t_min", "t_max", "points"])


def cmd_report(trace_dir: Path, out_dir: Optional[Path] = None, t_range=None) -> ReportSummary:
    trace_dir = Path(trace_dir)
    out_dir = Path(out_dir or trace_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    agg = aggregate(load_traces(trace_dir))
    summary = ReportSummary(aggregate=out_dir / AGGREGATE_FILE, slopes=out_dir / SLOPES_FILE)
    agg.to_csv(summary.aggregate, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
    slopes = slope_table(agg, t_range)
    slopes.to_csv(summary.slopes, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")

    for metric in CHART_METRICS:
        series: Dict[str, tuple] = {
            algo: (g["t"].to_numpy(float), g[f"{metric}_mean"].to_numpy(float))
            for algo, g in agg.groupby("algo", sort=True)
        }
        for scale, log in (("loglog", True), ("linear", False)):
            path = out_dir / f"{metric}_{scale}.svg"
            write_chart(
                path, series,
                title=f"{metric.upper()} vs rounds ({scale})",
                x_label="t", y_label=metric.upper(),
                log_x=log, log_y=log,
            )
            summary.charts.append(path)
    logger.info(f"Report written to {out_dir}")
    return summary
