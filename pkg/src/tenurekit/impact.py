"""COVID impact index: relative median-tenure change times a bootstrap weight.

The weight operationalizes "posterior probability that tenure fell" as the
fraction of paired bootstrap resamples in which the post-period KM median is
below the pre-period one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._seeding import rng_for
from ._validation import as_durations_events
from .survival import (_boot_medians, kaplan_meier_curve, log_rank_test,
                       median_tenure)


@dataclass(frozen=True)
class CIIResult:
    pre_mt_years: float
    post_mt_years: float
    relative_change: float
    posterior_weight: float
    cii: float
    p_value_logrank: float
    undefined: bool = False

    @property
    def cii_rounded(self) -> float:
        return round_half_up(self.cii, 1)

    def to_dict(self) -> dict:
        return {
            "pre_mt_years": self.pre_mt_years,
            "post_mt_years": self.post_mt_years,
            "relative_change": self.relative_change,
            "posterior_weight": self.posterior_weight,
            "cii": self.cii,
            "cii_rounded": self.cii_rounded,
            "p_value_logrank": self.p_value_logrank,
            "undefined": self.undefined,
        }


def round_half_up(x: float, digits: int = 1) -> float:
    if math.isnan(x):
        return x
    scale = 10.0**digits
    return math.floor(x * scale + 0.5) / scale


def posterior_weight(pre_durations, pre_events, post_durations, post_events,
                     n_boot: int = 1000, seed: int = 0) -> float:
    """Pr(post median < pre median) across independent bootstrap resamples.

    Resamples whose median is never reached are redrawn; total draws are
    capped at 3x n_boot, after which unreached pairs are discarded.
    """
    if n_boot < 1000:
        raise ValueError("n_boot must be at least 1000")
    pre_d, pre_e = as_durations_events(pre_durations, pre_events)
    post_d, post_e = as_durations_events(post_durations, post_events)
    rng = rng_for(seed, 2)
    pre_m = _boot_medians(pre_d, pre_e, n_boot, rng)
    post_m = _boot_medians(post_d, post_e, n_boot, rng)
    bad = np.isnan(pre_m) | np.isnan(post_m)
    drawn = n_boot
    while bad.any() and drawn < 3 * n_boot:
        k = int(bad.sum())
        take = min(k, 3 * n_boot - drawn)
        idx = np.nonzero(bad)[0][:take]
        pre_m[idx] = _boot_medians(pre_d, pre_e, take, rng)
        post_m[idx] = _boot_medians(post_d, post_e, take, rng)
        drawn += take
        bad = np.isnan(pre_m) | np.isnan(post_m)
    ok = ~bad
    if not ok.any():
        return float("nan")
    return float(np.mean(post_m[ok] < pre_m[ok]))


def covid_impact_index(pre_durations, pre_events, post_durations, post_events,
                       n_boot: int = 1000, seed: int = 0) -> CIIResult:
    """Medians, relative change, posterior weight, and their product."""
    pre_curve = kaplan_meier_curve(pre_durations, pre_events, ci_method="none")
    post_curve = kaplan_meier_curve(post_durations, post_events, ci_method="none")
    pre_med = median_tenure(pre_curve)
    post_med = median_tenure(post_curve)
    p_lr = log_rank_test([pre_durations, post_durations],
                         [pre_events, post_events]).p_value
    if not pre_med.reached or not post_med.reached:
        return CIIResult(
            pre_mt_years=pre_med.value_years or float("nan"),
            post_mt_years=post_med.value_years or float("nan"),
            relative_change=float("nan"), posterior_weight=float("nan"),
            cii=float("nan"), p_value_logrank=p_lr, undefined=True)
    rel = (pre_med.value_days - post_med.value_days) / pre_med.value_days
    weight = posterior_weight(pre_durations, pre_events, post_durations,
                              post_events, n_boot=n_boot, seed=seed)
    return CIIResult(
        pre_mt_years=pre_med.value_years,
        post_mt_years=post_med.value_years,
        relative_change=float(rel),
        posterior_weight=weight,
        cii=float(rel * weight),
        p_value_logrank=p_lr,
    )
