"""Daily and annualized hazard rates, rolling trend, and departure-peak detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_durations_events

DAYS_PER_BIN_YEAR = 365  # yearly bin k covers days [365(k-1)+1, 365k]
NOISY_TAIL_YEARS = 26    # community history is too short to trust later bins


@dataclass(frozen=True)
class HazardSeries:
    """Discrete-time hazard per contiguous bin starting at 1.

    ``granularity`` is "daily" or "yearly"; ``rate[i]`` is the probability of
    departure in bin ``index[i]`` conditional on entering it at risk.
    """

    granularity: str
    index: np.ndarray
    rate: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    partial_last_bin: bool = False

    def low_confidence(self) -> np.ndarray:
        """Mask of yearly bins beyond the trustworthy history window."""
        if self.granularity != "yearly":
            raise ValueError("low-confidence flag applies to yearly series")
        return self.index > NOISY_TAIL_YEARS


def daily_hazard(durations, events=None) -> HazardSeries:
    """h(d) = events on day d / spells at risk entering day d, for d = 1..max."""
    dur, evt = as_durations_events(durations, events)
    if not evt.any():
        raise ValueError("daily_hazard needs at least one event")
    days = np.ceil(dur).astype(np.int64)
    max_day = int(days.max())
    removals = np.bincount(days, minlength=max_day + 1)[1:]
    event_counts = np.bincount(days[evt], minlength=max_day + 1)[1:]
    at_risk = dur.size - np.concatenate([[0], np.cumsum(removals)[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(at_risk > 0, event_counts / np.maximum(at_risk, 1), 0.0)
    return HazardSeries("daily", np.arange(1, max_day + 1), rate,
                        at_risk.astype(np.int64), event_counts)


def annualize_hazard(daily: HazardSeries, method: str = "ratio") -> HazardSeries:
    """Aggregate a daily series into yearly bins.

    ``method="ratio"`` uses events in the bin over the risk set entering it;
    ``method="product"`` uses 1 - prod(1 - h_d), the compounded view. A
    trailing bin shorter than a full year is emitted with a partial flag.
    """
    if daily.granularity != "daily":
        raise ValueError("annualize_hazard expects a daily series")
    n_days = daily.index.size
    n_years = int(np.ceil(n_days / DAYS_PER_BIN_YEAR))
    partial = n_days % DAYS_PER_BIN_YEAR != 0
    years = np.arange(1, n_years + 1)
    rate = np.empty(n_years)
    at_risk = np.empty(n_years, dtype=np.int64)
    events = np.empty(n_years, dtype=np.int64)
    for k in range(n_years):
        lo = k * DAYS_PER_BIN_YEAR
        hi = min((k + 1) * DAYS_PER_BIN_YEAR, n_days)
        at_risk[k] = daily.at_risk[lo]
        events[k] = daily.events[lo:hi].sum()
        if method == "ratio":
            rate[k] = events[k] / at_risk[k] if at_risk[k] > 0 else 0.0
        elif method == "product":
            rate[k] = 1.0 - np.prod(1.0 - daily.rate[lo:hi])
        else:
            raise ValueError(f"unknown method {method!r}")
    keep = at_risk > 0
    return HazardSeries("yearly", years[keep], rate[keep], at_risk[keep],
                        events[keep], partial_last_bin=partial)


def rolling_trend(yearly: HazardSeries, window: int = 5) -> np.ndarray:
    """Centered moving average; edges shrink to the available window."""
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and at least 3")
    n = yearly.rate.size
    if window > n:
        raise ValueError(f"window {window} exceeds series length {n}")
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(yearly.rate)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def detect_peaks(yearly: HazardSeries, trend: np.ndarray,
                 min_excess: float = 0.10) -> list[int]:
    """Interior local maxima exceeding the trend by a relative margin.

    Relative thresholding makes detection invariant to rescaling all rates.
    """
    r = yearly.rate
    if trend.shape != r.shape:
        raise ValueError("trend must align with the yearly series")
    peaks = []
    for i in range(1, r.size - 1):
        if r[i] > r[i - 1] and r[i] >= r[i + 1] and r[i] >= trend[i] * (1.0 + min_excess):
            peaks.append(int(yearly.index[i]))
    return peaks


class AnnualizedHazardEstimator(BaseEstimator):
    """Daily-to-yearly hazard pipeline with trend smoothing and peak detection.

    Parameters
    ----------
    window : rolling-trend window in years (odd, >= 3).
    min_excess : relative excess over trend required to call a peak.
    method : yearly aggregation, "ratio" or "product".
    """

    def __init__(self, window: int = 5, min_excess: float = 0.10,
                 method: str = "ratio"):
        self.window = window
        self.min_excess = min_excess
        self.method = method

    def fit(self, durations, events=None):
        self.daily_ = daily_hazard(durations, events)
        self.yearly_ = annualize_hazard(self.daily_, method=self.method)
        self.trend_ = rolling_trend(self.yearly_, window=self.window)
        self.peaks_ = detect_peaks(self.yearly_, self.trend_,
                                   min_excess=self.min_excess)
        return self
