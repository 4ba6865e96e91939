"""Forecast error metrics and repeated-run summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.size != p.size:
        raise MetricError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise MetricError("empty input")
    return a, p


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _pair(actual, predicted)
    zeros = np.flatnonzero(a == 0)
    if zeros.size:
        raise MetricError(f"MAPE undefined: actual value is zero at index {zeros[0]}")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


@dataclass(frozen=True)
class RunSummary:
    mape_max: float
    mape_min: float
    mape_mean: float
    rmse_mean: float
    run_count: int
    per_run: tuple[tuple[float, float], ...]


def summarize(per_run) -> RunSummary:
    """Max/min/mean MAPE and mean RMSE over ``(mape, rmse)`` pairs."""
    runs = tuple((float(m), float(r)) for m, r in per_run)
    if not runs:
        raise MetricError("no runs to summarise")
    mapes = sorted(m for m, _ in runs)
    rmses = sorted(r for _, r in runs)
    # fsum over sorted values keeps the mean independent of run order
    return RunSummary(
        mape_max=mapes[-1],
        mape_min=mapes[0],
        mape_mean=math.fsum(mapes) / len(runs),
        rmse_mean=math.fsum(rmses) / len(runs),
        run_count=len(runs),
        per_run=runs,
    )


METRICS_COLUMNS = ("model", "mape_max", "mape_min", "mape_mean", "rmse_mean")


def metrics_csv_row(model: str, summary: RunSummary) -> str:
    return ",".join(
        [model] + [repr(v) for v in (summary.mape_max, summary.mape_min, summary.mape_mean, summary.rmse_mean)]
    )


def metrics_csv(rows: list[tuple[str, RunSummary]]) -> str:
    lines = [",".join(METRICS_COLUMNS)] + [metrics_csv_row(name, s) for name, s in rows]
    return "\n".join(lines) + "\n"


def summary_block(model: str, summary: RunSummary) -> str:
    """Human-readable ``key=value`` block."""
    return "\n".join(
        [
            f"model={model}",
            f"run_count={summary.run_count}",
            f"mape_max={summary.mape_max:.4f}",
            f"mape_min={summary.mape_min:.4f}",
            f"mape_mean={summary.mape_mean:.4f}",
            f"rmse_mean={summary.rmse_mean:.4f}",
        ]
    )
