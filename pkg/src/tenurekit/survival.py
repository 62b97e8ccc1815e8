"""Kaplan-Meier estimation, median tenure, bootstrap CIs and the log-rank test.

Durations are unit-agnostic (the pipeline feeds days); event indicators mark
observed exits, everything else is right-censored. Ties at one time are
resolved events-first, i.e. individuals censored at t are still at risk at t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator

from ._seeding import rng_for
from ._validation import as_durations_events, check_in_unit_interval
from .stats import TestResult, _clamp_p, chi2_sf

DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class SurvivalCurve:
    """Step-function survival estimate with risk-set bookkeeping.

    ``times`` are the distinct event times (ascending); survival drops only
    there. ``ci_lower``/``ci_upper`` are per-step bands when requested.
    """

    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    n: int
    ci_lower: np.ndarray | None = None
    ci_upper: np.ndarray | None = None

    def survival_at(self, t) -> np.ndarray:
        """S(t) evaluated as a right-continuous step function."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.times, t, side="right")
        padded = np.concatenate([[1.0], self.survival])
        return padded[idx]

    def to_rows(self, time_scale: float = 1.0) -> list[dict]:
        rows = []
        for i in range(self.times.size):
            rows.append({
                "time_years": self.times[i] / time_scale,
                "survival": self.survival[i],
                "at_risk": int(self.at_risk[i]),
                "events": int(self.events[i]),
                "ci_lo": self.ci_lower[i] if self.ci_lower is not None else "",
                "ci_hi": self.ci_upper[i] if self.ci_upper is not None else "",
            })
        return rows


@dataclass(frozen=True)
class MedianTenure:
    """Smallest time with S(t) <= 0.5, or unreached."""

    value_days: float | None
    ci_lower_days: float | None = None
    ci_upper_days: float | None = None
    unstable: bool = False

    @property
    def reached(self) -> bool:
        return self.value_days is not None

    @property
    def value_years(self) -> float | None:
        return None if self.value_days is None else self.value_days / DAYS_PER_YEAR

    @property
    def ci_years(self) -> tuple[float | None, float | None]:
        lo = None if self.ci_lower_days is None else self.ci_lower_days / DAYS_PER_YEAR
        hi = None if self.ci_upper_days is None else self.ci_upper_days / DAYS_PER_YEAR
        return lo, hi


def _event_table(dur: np.ndarray, evt: np.ndarray):
    """Distinct times with event/censor counts and the entering risk set."""
    order = np.argsort(dur, kind="mergesort")
    dur = dur[order]
    evt = evt[order]
    times, first = np.unique(dur, return_index=True)
    boundaries = np.append(first, dur.size)
    d = np.add.reduceat(evt.astype(np.int64), first)
    total = np.diff(boundaries)
    removed_before = np.concatenate([[0], np.cumsum(total)[:-1]])
    n_at_risk = dur.size - removed_before
    return times, d, total, n_at_risk


def kaplan_meier_curve(durations, events=None, conf_level: float = 0.95,
                       ci_method: str = "log-log") -> SurvivalCurve:
    """Product-limit estimator over a censored sample.

    ``ci_method``: "log-log" Greenwood bands on the complementary log-log
    scale, or "none".
    """
    dur, evt = as_durations_events(durations, events)
    times, d, total, n_at_risk = _event_table(dur, evt)
    mask = d > 0
    times_e = times[mask]
    d_e = d[mask]
    n_e = n_at_risk[mask]
    surv = np.cumprod(1.0 - d_e / n_e)
    ci_lo = ci_hi = None
    if ci_method == "log-log" and times_e.size:
        check_in_unit_interval(conf_level, "conf_level")
        z = float(special.ndtri(0.5 + conf_level / 2.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            var_sum = np.cumsum(d_e / (n_e * (n_e - d_e)))
            log_s = np.log(surv)
            se = np.sqrt(var_sum) / np.abs(log_s)
            theta = np.log(-log_s)
            ci_lo = np.exp(-np.exp(theta + z * se))
            ci_hi = np.exp(-np.exp(theta - z * se))
        bad = ~np.isfinite(ci_lo) | ~np.isfinite(ci_hi)
        ci_lo = np.where(bad, np.nan, ci_lo)
        ci_hi = np.where(bad, np.nan, ci_hi)
    return SurvivalCurve(times=times_e, survival=surv, at_risk=n_e, events=d_e,
                         n=dur.size, ci_lower=ci_lo, ci_upper=ci_hi)


def median_tenure(curve: SurvivalCurve) -> MedianTenure:
    """Step-function median: smallest event time where S drops to <= 0.5."""
    idx = np.nonzero(curve.survival <= 0.5)[0]
    if idx.size == 0:
        return MedianTenure(value_days=None)
    return MedianTenure(value_days=float(curve.times[idx[0]]))


@dataclass(frozen=True)
class CumulativeHazardCurve:
    times: np.ndarray
    cumulative_hazard: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray


def nelson_aalen_curve(durations, events=None) -> CumulativeHazardCurve:
    """Nelson-Aalen cumulative hazard H(t) = sum d_i / n_i over event times."""
    dur, evt = as_durations_events(durations, events)
    times, d, _, n_at_risk = _event_table(dur, evt)
    mask = d > 0
    h = np.cumsum(d[mask] / n_at_risk[mask])
    return CumulativeHazardCurve(times=times[mask], cumulative_hazard=h,
                                 at_risk=n_at_risk[mask], events=d[mask])


# ---------------------------------------------------------------------------
# vectorized bootstrap over the (duration, event) multiset


def _pack(dur: np.ndarray, evt: np.ndarray):
    keys = np.stack([dur, evt.astype(float)], axis=1)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    order = np.lexsort((-uniq[:, 1], uniq[:, 0]))  # by time, events first
    return uniq[order, 0], uniq[order, 1].astype(bool), counts[order]


def _boot_medians(dur: np.ndarray, evt: np.ndarray, n_boot: int,
                  rng: np.random.Generator, chunk: int = 256) -> np.ndarray:
    """KM medians of ``n_boot`` multinomial resamples; NaN where unreached."""
    t_u, e_u, counts = _pack(dur, evt)
    n = dur.size
    probs = counts / n
    # columns grouped by distinct time so risk sets are shared within a tie
    times_only, inverse = np.unique(t_u, return_inverse=True)
    k_times = times_only.size
    out = np.empty(n_boot)
    done = 0
    while done < n_boot:
        b = min(chunk, n_boot - done)
        draws = rng.multinomial(n, probs, size=b).astype(float)
        d_mat = np.zeros((b, k_times))
        c_mat = np.zeros((b, k_times))
        np.add.at(d_mat, (slice(None), inverse[e_u]), draws[:, e_u])
        np.add.at(c_mat, (slice(None), inverse[~e_u]), draws[:, ~e_u])
        removed = np.cumsum(d_mat + c_mat, axis=1)
        n_risk = n - np.concatenate([np.zeros((b, 1)), removed[:, :-1]], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(n_risk > 0, 1.0 - d_mat / np.maximum(n_risk, 1.0), 1.0)
        surv = np.cumprod(factor, axis=1)
        hit = surv <= 0.5
        reached = hit.any(axis=1)
        first = np.argmax(hit, axis=1)
        med = np.where(reached, times_only[first], np.nan)
        out[done : done + b] = med
        done += b
    return out


def bootstrap_median_ci(durations, events=None, n_boot: int = 1000,
                        seed: int = 0, level: float = 0.95) -> MedianTenure:
    """Percentile bootstrap interval for the KM median.

    Deterministic for a fixed seed. If more than 10% of resamples never reach
    the median, the interval is flagged unstable.
    """
    if n_boot < 200:
        raise ValueError("n_boot must be at least 200")
    check_in_unit_interval(level, "level")
    dur, evt = as_durations_events(durations, events)
    point = median_tenure(kaplan_meier_curve(dur, evt, ci_method="none"))
    rng = rng_for(seed, 1)
    meds = _boot_medians(dur, evt, n_boot, rng)
    unreached = np.isnan(meds)
    unstable = unreached.mean() > 0.10
    valid = meds[~unreached]
    if valid.size == 0:
        return MedianTenure(point.value_days, None, None, unstable=True)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(valid, [alpha, 1.0 - alpha])
    return MedianTenure(point.value_days, float(lo), float(hi), unstable=bool(unstable))


# ---------------------------------------------------------------------------
# log-rank test


def log_rank_test(duration_groups, event_groups=None) -> TestResult:
    """Chi-square log-rank comparison of two or more censored samples.

    ``duration_groups`` is a sequence of arrays; ``event_groups`` matches it
    (all-events when omitted). Uses the full Mantel-Haenszel covariance, so
    the statistic is exact for any number of groups; df = k - 1.
    """
    k = len(duration_groups)
    if k < 2:
        raise ValueError("log_rank_test needs at least 2 groups")
    if event_groups is None:
        event_groups = [None] * k
    packed = [as_durations_events(d, e) for d, e in zip(duration_groups, event_groups)]
    for i, (_, evt) in enumerate(packed):
        if not evt.any():
            warnings.warn(f"log-rank group {i} has zero events; it only "
                          "contributes to risk sets")
    all_dur = np.concatenate([d for d, _ in packed])
    all_evt = np.concatenate([e for _, e in packed])
    labels = np.concatenate([np.full(d.size, i) for i, (d, _) in enumerate(packed)])
    event_times = np.unique(all_dur[all_evt])
    if event_times.size == 0:
        raise ValueError("log_rank_test needs at least one observed event")

    # per-group counts of events and removals at each distinct event time
    observed = np.zeros((k, event_times.size))
    at_risk = np.zeros((k, event_times.size))
    for g in range(k):
        dur_g = all_dur[labels == g]
        evt_g = all_evt[labels == g]
        # risk set entering t: durations >= t
        at_risk[g] = dur_g.size - np.searchsorted(np.sort(dur_g), event_times, side="left")
        ev_sorted = np.sort(dur_g[evt_g])
        left = np.searchsorted(ev_sorted, event_times, side="left")
        right = np.searchsorted(ev_sorted, event_times, side="right")
        observed[g] = right - left
    n_tot = at_risk.sum(axis=0)
    d_tot = observed.sum(axis=0)
    keep = n_tot > 0
    n_tot, d_tot = n_tot[keep], d_tot[keep]
    observed, at_risk = observed[:, keep], at_risk[:, keep]
    expected = at_risk * (d_tot / n_tot)
    u = (observed - expected).sum(axis=1)[:-1]
    # Mantel-Haenszel covariance of the first k-1 group event counts
    with np.errstate(divide="ignore", invalid="ignore"):
        hyper = np.where(n_tot > 1, d_tot * (n_tot - d_tot) / (n_tot - 1), 0.0)
    frac = at_risk / n_tot
    cov = np.zeros((k - 1, k - 1))
    for a in range(k - 1):
        for b in range(a, k - 1):
            delta = 1.0 if a == b else 0.0
            cov_ab = np.sum(hyper * frac[a] * (delta - frac[b]))
            cov[a, b] = cov_ab
            cov[b, a] = cov_ab
    if np.allclose(cov, 0.0):
        return TestResult("log_rank", 0.0, 1.0, df=k - 1, notes=("degenerate",))
    chi2 = float(u @ np.linalg.pinv(cov) @ u)
    chi2 = max(chi2, 0.0)
    p, clamp_notes = _clamp_p(chi2_sf(chi2, k - 1))
    return TestResult("log_rank", chi2, p, df=k - 1, notes=clamp_notes)


# ---------------------------------------------------------------------------
# sklearn-style estimator facade


class KaplanMeierEstimator(BaseEstimator):
    """Kaplan-Meier survival estimator with Greenwood log-log bands.

    Parameters
    ----------
    conf_level : coverage of the per-step confidence band.
    ci_method : "log-log" or "none".
    """

    def __init__(self, conf_level: float = 0.95, ci_method: str = "log-log"):
        self.conf_level = conf_level
        self.ci_method = ci_method

    def fit(self, durations, events=None):
        curve = kaplan_meier_curve(durations, events,
                                   conf_level=self.conf_level,
                                   ci_method=self.ci_method)
        self.curve_ = curve
        self.event_times_ = curve.times
        self.survival_ = curve.survival
        self.at_risk_ = curve.at_risk
        self.events_ = curve.events
        self.median_ = median_tenure(curve)
        self.n_ = curve.n
        return self

    def predict(self, times):
        """Survival probability at the given times."""
        return self.curve_.survival_at(times)


class NelsonAalenEstimator(BaseEstimator):
    """Nelson-Aalen cumulative hazard estimator."""

    def fit(self, durations, events=None):
        curve = nelson_aalen_curve(durations, events)
        self.curve_ = curve
        self.event_times_ = curve.times
        self.cumulative_hazard_ = curve.cumulative_hazard
        return self

    def predict(self, times):
        """H(t) evaluated as a right-continuous step function."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.searchsorted(self.event_times_, t, side="right")
        padded = np.concatenate([[0.0], self.cumulative_hazard_])
        return padded[idx]
