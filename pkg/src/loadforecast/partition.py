"""Histogram entropy, adjacent-mode mutual information and the high/low split.

All entropies use base-10 logarithms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .vmd import ModeSet


@dataclass(frozen=True)
class HistogramSpec:
    """Equal-width binning.

    ``bin_count=None`` means ``ceil(sqrt(T))`` for a length-T input.
    ``value_range=None`` bins over each variable's own min..max, otherwise
    the explicit ``(lo, hi)`` is used for every variable.
    """

    bin_count: int | None = None
    value_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.bin_count is not None and self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")
        if self.value_range is not None and not self.value_range[0] < self.value_range[1]:
            raise ValueError("explicit range needs lo < hi")

    def bins_for(self, n: int) -> int:
        return self.bin_count if self.bin_count is not None else max(2, math.ceil(math.sqrt(n)))


@dataclass(frozen=True)
class FrequencyPartition:
    boundary_index: int
    adjacent_mi: np.ndarray
    low_series: np.ndarray
    high_series: np.ndarray
    warnings: tuple[str, ...] = field(default=())


def _bin_indices(x: np.ndarray, bins: int, value_range) -> np.ndarray:
    if value_range is None:
        lo, hi = float(x.min()), float(x.max())
    else:
        lo, hi = value_range
    if hi <= lo:
        return np.zeros(x.size, dtype=np.intp)
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.intp)
    return np.clip(idx, 0, bins - 1)


def _entropy_from_counts(counts: np.ndarray, total: int) -> float:
    # sorted so the sum does not depend on cell layout (keeps MI exactly symmetric)
    p = np.sort(counts[counts > 0]) / total
    return float(-np.sum(p * np.log10(p)))


def _check_input(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-D sample of at least 2 values")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    return x


def entropy(x, spec: HistogramSpec = HistogramSpec()) -> float:
    x = _check_input(x)
    bins = spec.bins_for(x.size)
    counts = np.bincount(_bin_indices(x, bins, spec.value_range), minlength=bins)
    return _entropy_from_counts(counts, x.size)


def joint_entropy(x, y, spec: HistogramSpec = HistogramSpec()) -> float:
    x = _check_input(x)
    y = _check_input(y)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    bins = spec.bins_for(x.size)
    ix = _bin_indices(x, bins, spec.value_range)
    iy = _bin_indices(y, bins, spec.value_range)
    counts = np.bincount(ix * bins + iy, minlength=bins * bins)
    return _entropy_from_counts(counts, x.size)


def mutual_information(x, y, spec: HistogramSpec = HistogramSpec()) -> float:
    """``H(x) + H(y) - H(x, y)``, clamped at zero."""
    hxy = joint_entropy(x, y, spec)
    return max(0.0, entropy(x, spec) + entropy(y, spec) - hxy)


def _pick_boundary(mi: np.ndarray) -> int:
    for i in range(1, mi.size - 1):
        if mi[i] < mi[i - 1] and mi[i] <= mi[i + 1]:
            return i
    return int(np.argmin(mi))


def find_boundary(modes, spec: HistogramSpec = HistogramSpec()) -> FrequencyPartition:
    """Split modes at the first local minimum of adjacent-pair MI.

    Modes ``0..b`` (lowest center frequencies) are summed into the low
    series, the rest into the high series. Falls back to the global
    minimum when the MI sequence has no interior local minimum.
    """
    rows = modes.modes if isinstance(modes, ModeSet) else np.asarray(modes, dtype=float)
    k = rows.shape[0]
    if k == 1:
        msg = "single mode: no high/low boundary, all mass assigned to the low series"
        warnings.warn(msg, stacklevel=2)
        return FrequencyPartition(0, np.empty(0), rows[0].copy(), np.zeros_like(rows[0]), (msg,))

    mi = np.array([mutual_information(rows[n], rows[n + 1], spec) for n in range(k - 1)])
    b = _pick_boundary(mi)
    low = rows[: b + 1].sum(axis=0)
    high = rows[b + 1 :].sum(axis=0)
    return FrequencyPartition(b, mi, low, high)
