"""
Parameter sweeps: repeated runs per point, aggregated to mean/min/max.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from relchain.bench.metrics import reports_frame
from relchain.bench.run_runs import run_repetitions
from relchain.errors import ConfigError
from relchain.workloads import SWEEP_BATCH_SIZES
from setup.utils import create_directory

logger = logging.getLogger(__name__)

SWEEP_POINTS = {
    "batch": SWEEP_BATCH_SIZES,
    "timeout_commit": (25, 50, 100, 250, 500, 1000),
    "nodes": (1, 4, 8),
}
AGGREGATED = ("end_to_end_ms", "processing_ms", "inspection_ms", "latency_mean_ms", "latency_p95_ms", "blocks",
              "txs_per_block", "overhead_ratio")


def ci95_halfwidth(samples):
    """Half-width of the 95% t-interval of the mean; nan below two samples."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) < 2:
        return float("nan")
    return float(stats.t.ppf(0.975, len(samples) - 1) * stats.sem(samples))


def aggregate(frame, dimension):
    """One row per sweep point with <metric>_mean, _min and _max columns."""
    grouped = frame.groupby("value", sort=True)[list(AGGREGATED)].agg(["mean", "min", "max"])
    grouped.columns = [f"{metric}_{stat}" for metric, stat in grouped.columns]
    grouped.insert(0, "reps", frame.groupby("value", sort=True).size())
    grouped["end_to_end_ms_ci95"] = frame.groupby("value", sort=True)["end_to_end_ms"].agg(ci95_halfwidth)
    grouped = grouped.reset_index()
    grouped.insert(0, "dimension", dimension)
    return grouped


def sweep(config, dimension, values=None, statements=None, save_path=None, replay=True):
    """
    Run config at every point of one dimension.

    :param dimension: batch, timeout_commit or nodes
    :param values: points to visit (default: the standard points of the dimension)
    :param statements: fixed statement sequence (default: generated from the workload config)
    :param save_path: directory for raw.csv and sweep.csv
    :return: (raw per-run frame, aggregated frame)
    """
    if dimension not in SWEEP_POINTS:
        raise ConfigError(f"unknown sweep dimension {dimension!r}, expected one of {sorted(SWEEP_POINTS)}")
    values = SWEEP_POINTS[dimension] if values is None else values
    raw = []
    for value in values:
        point = config.with_point(dimension, value)
        point = point.model_copy(update={"run_id": f"{config.run_id}-{dimension}-{value}"})
        logger.info("sweep %s = %s (%d repetitions)", dimension, value, point.repetitions)
        frame = reports_frame(run_repetitions(point, statements=statements, replay=replay))
        frame.insert(1, "value", value)
        raw.append(frame)
    raw = pd.concat(raw, ignore_index=True)
    summary = aggregate(raw, dimension)
    if save_path is not None:
        save_path = create_directory(save_path)
        raw.to_csv(Path(save_path) / "raw.csv", index=False)
        summary.to_csv(Path(save_path) / "sweep.csv", index=False)
    return raw, summary
