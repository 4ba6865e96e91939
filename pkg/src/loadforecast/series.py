"""Load series ingestion, min-max scaling, lag windowing and chronological splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np


class SeriesError(ValueError):
    """Raised for malformed or unusable input series."""


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar load sequence.

    ``sample_interval`` defaults to 15 minutes. ``timestamps`` is carried
    through from CSV input when present but never used for modelling.
    """

    values: np.ndarray
    sample_interval: timedelta = timedelta(minutes=15)
    origin_timestamp: datetime | None = None
    timestamps: tuple[str, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise SeriesError("series values must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            raise SeriesError("series contains non-finite values")
        if self.sample_interval <= timedelta(0):
            raise SeriesError("sample_interval must be strictly positive")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(values, self.sample_interval, self.origin_timestamp, self.timestamps)


@dataclass(frozen=True)
class ScalingParams:
    min: float
    max: float

    def __post_init__(self):
        if not self.max > self.min:
            raise SeriesError(f"degenerate scale: max ({self.max}) must exceed min ({self.min})")


@dataclass(frozen=True)
class SupervisedDataset:
    """Lag-window features and the value ``horizon`` steps after each window."""

    features: np.ndarray
    targets: np.ndarray
    lag_count: int
    horizon: int = 1

    def __len__(self) -> int:
        return self.targets.size


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise SeriesError("train_fraction must lie in (0, 1)")

    def split_index(self, n: int) -> int:
        idx = math.floor(self.train_fraction * n)
        if idx < 1 or idx >= n:
            raise SeriesError(
                f"train_fraction {self.train_fraction} on {n} rows leaves an empty partition"
            )
        return idx


def _parse_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value


def load_csv(path, column: int | str = -1, sample_interval: timedelta = timedelta(minutes=15)) -> TimeSeries:
    """Read one column of a CSV file as a :class:`TimeSeries`.

    A header row is detected when the selected cell of the first row does
    not parse as a number. With ``column=-1`` (the default) the last
    column is used, which covers both bare ``value`` files and
    ``timestamp,value`` files. Row numbers in error messages count data
    rows from 1, excluding the header.
    """
    path = Path(path)
    if not path.is_file():
        raise SeriesError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise SeriesError(f"{path}: empty column")

    col_idx = column
    if isinstance(column, str):
        header = [c.strip() for c in rows[0]]
        if column not in header:
            raise SeriesError(f"{path}: no column named {column!r}")
        col_idx = header.index(column)
        rows = rows[1:]
    else:
        try:
            first = rows[0][col_idx].strip()
        except IndexError:
            raise SeriesError(f"{path}: row 1 has no column {column}") from None
        if _parse_float(first) is None:
            rows = rows[1:]
    if not rows:
        raise SeriesError(f"{path}: empty column")

    values = []
    stamps = []
    for n, row in enumerate(rows, start=1):
        try:
            cell = row[col_idx].strip()
        except IndexError:
            raise SeriesError(f"{path}: row {n} has no column {column}") from None
        value = _parse_float(cell)
        if value is None or not math.isfinite(value):
            raise SeriesError(f"{path}: cannot parse {cell!r} as a finite number at row {n}")
        values.append(value)
        if len(row) > 1:
            stamps.append(row[0].strip())

    timestamps = tuple(stamps) if len(stamps) == len(values) else None
    origin = None
    if timestamps:
        try:
            origin = datetime.fromisoformat(timestamps[0])
        except ValueError:
            origin = None
    return TimeSeries(np.array(values), sample_interval, origin, timestamps)


def minmax_fit(series) -> ScalingParams:
    values = np.asarray(getattr(series, "values", series), dtype=float)
    return ScalingParams(float(values.min()), float(values.max()))


def _scale_values(values, params: ScalingParams) -> np.ndarray:
    return (np.asarray(values, dtype=float) - params.min) / (params.max - params.min)


def _unscale_values(values, params: ScalingParams) -> np.ndarray:
    return np.asarray(values, dtype=float) * (params.max - params.min) + params.min


def minmax_apply(series, params: ScalingParams):
    """Map values onto ``(x - min) / (max - min)``; accepts a TimeSeries or an array."""
    if isinstance(series, TimeSeries):
        return series.with_values(_scale_values(series.values, params))
    return _scale_values(series, params)


def minmax_invert(series, params: ScalingParams):
    if isinstance(series, TimeSeries):
        return series.with_values(_unscale_values(series.values, params))
    return _unscale_values(series, params)


def make_lag_dataset(series, lag_count: int = 7, horizon: int = 1) -> SupervisedDataset:
    """Slide a ``lag_count`` window over the series.

    Row ``i`` holds ``values[i:i + lag_count]``; its target is
    ``values[i + lag_count + horizon - 1]``.
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if lag_count < 1 or horizon < 1:
        raise SeriesError("lag_count and horizon must be >= 1")
    n = values.size - lag_count - horizon + 1
    if n <= 0:
        raise SeriesError(
            f"series of length {values.size} too short for lag_count={lag_count}, horizon={horizon}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(values, lag_count)[:n]
    targets = values[lag_count + horizon - 1 : lag_count + horizon - 1 + n]
    return SupervisedDataset(windows.copy(), targets.copy(), lag_count, horizon)


def chrono_split(dataset: SupervisedDataset, spec: SplitSpec) -> tuple[SupervisedDataset, SupervisedDataset]:
    """Split rows at ``floor(train_fraction * N)`` with no shuffling."""
    idx = spec.split_index(len(dataset))
    train = SupervisedDataset(dataset.features[:idx], dataset.targets[:idx], dataset.lag_count, dataset.horizon)
    test = SupervisedDataset(dataset.features[idx:], dataset.targets[idx:], dataset.lag_count, dataset.horizon)
    return train, test
