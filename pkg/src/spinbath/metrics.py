"""Quantities read off a sampled |r(t)|^2 curve."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import ModelError, TimeSeries

DEFAULT_EPSILON = 0.01
DEFAULT_SUSTAIN = 1.0
DEFAULT_PEAK_FLOOR = 0.5
DEFAULT_TAIL_START = 5.0


@dataclass(frozen=True)
class MetricsReport:
    decoherence_time: Optional[float]
    threshold: float
    sustain_window: float
    peak_floor: float
    peaks: list = field(default_factory=list)
    tail_start: float = DEFAULT_TAIL_START
    long_time_mean: float = float("nan")
    long_time_max: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "decoherence_time": self.decoherence_time,
            "epsilon": self.threshold,
            "sustain": self.sustain_window,
            "peak_floor": self.peak_floor,
            "n_peaks": len(self.peaks),
            "peaks": [{"t": t, "abs_r2": v} for t, v in self.peaks],
            "tail_start": self.tail_start,
            "tail_mean": self.long_time_mean,
            "tail_max": self.long_time_max,
        }


def estimate_decoherence_time(series: TimeSeries, epsilon: float = DEFAULT_EPSILON,
                              sustain: float = DEFAULT_SUSTAIN) -> Optional[float]:
    """Earliest grid time t* with |r|^2 <= epsilon on all of [t*, t* + sustain].

    The window must fit inside the grid; returns None otherwise.
    """
    if not 0.0 < epsilon < 1.0:
        raise ModelError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    step = series.grid.step
    if not sustain >= step * (1 - 1e-9):
        raise ModelError(f"sustain ({sustain!r}) must be at least one grid step ({step!r})")
    width = int(np.floor(sustain / step + 1e-9))
    below = series.abs_r2 <= epsilon
    n = len(below)
    # run[k] = number of consecutive below-threshold samples starting at k
    run = np.zeros(n + 1, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        run[k] = run[k + 1] + 1 if below[k] else 0
    ok = np.nonzero(run[:n] >= width + 1)[0]
    if ok.size == 0:
        return None
    return float(series.times[ok[0]])


def detect_peaks(series: TimeSeries, floor: float = DEFAULT_PEAK_FLOOR,
                 t_min: Optional[float] = None, t_max: Optional[float] = None) -> list[tuple[float, float]]:
    """Three-point local maxima with value >= floor, excluding t = 0 and the grid ends.

    Peak times are accurate to one grid step.
    """
    if not 0.0 < floor < 1.0:
        raise ModelError(f"floor must lie in (0, 1), got {floor!r}")
    y = series.abs_r2
    t = series.times
    if len(y) < 3:
        return []
    mid = y[1:-1]
    is_peak = (mid > y[:-2]) & (mid >= y[2:]) & (mid >= floor)
    idx = np.nonzero(is_peak)[0] + 1
    out = []
    for k in idx:
        tk = float(t[k])
        if tk == 0.0:
            continue
        if t_min is not None and tk < t_min:
            continue
        if t_max is not None and tk > t_max:
            continue
        out.append((tk, float(y[k])))
    return out


def tail_statistics(series: TimeSeries, tail_start: float = DEFAULT_TAIL_START) -> tuple[float, float]:
    """Mean and max of |r|^2 over [tail_start, t_end]."""
    mask = series.times >= tail_start
    if not np.any(mask):
        raise ModelError(f"tail window starting at {tail_start!r} is empty")
    tail = series.abs_r2[mask]
    return float(np.mean(tail)), float(np.max(tail))


def summarize(series: TimeSeries, epsilon: float = DEFAULT_EPSILON, sustain: float = DEFAULT_SUSTAIN,
              peak_floor: float = DEFAULT_PEAK_FLOOR, tail_start: float = DEFAULT_TAIL_START) -> MetricsReport:
    t_d = estimate_decoherence_time(series, epsilon, sustain)
    peaks = detect_peaks(series, peak_floor)
    try:
        mean, mx = tail_statistics(series, tail_start)
    except ModelError:
        mean = mx = float("nan")
    return MetricsReport(t_d, epsilon, sustain, peak_floor, peaks, tail_start, mean, mx)
