"""Synthetic-data generators used as ground-truth oracles for the estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from ._seeding import rng_for
from .ingest import DEFAULT_OBSERVATION_END, OwnershipSpell
from .parametric import MixtureModel
from .survey import SurveyResponse

DAYS_PER_YEAR = 365.25

BOOM_WINDOW = (date(2005, 1, 1), date(2006, 12, 31))
BOOM_FRACTION = 0.30


def weibull_quantile(u, k: float, lam: float) -> np.ndarray:
    """Inverse CDF: lam * (-ln(1-u))^(1/k)."""
    u = np.asarray(u, dtype=float)
    return lam * (-np.log1p(-u)) ** (1.0 / k)


@dataclass(frozen=True)
class SimSpec:
    """Sampling plan for synthetic ownership spells."""

    mixture: MixtureModel
    n: int
    seed: int
    entry_process: str = "uniform"  # or "boom_wave"
    entry_start: date = date(1986, 1, 1)
    censor_date: date = DEFAULT_OBSERVATION_END

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.mixture.family != "weibull":
            raise ValueError("spell generator samples Weibull mixtures")
        if self.entry_process not in ("uniform", "boom_wave"):
            raise ValueError(f"unknown entry process {self.entry_process!r}")


def sample_mixture_years(mixture: MixtureModel, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws: pick a component by weight, then its quantile."""
    weights = np.array([w for w, _ in mixture.components])
    choice = rng.choice(len(weights), size=n, p=weights)
    u = rng.random(n)
    out = np.empty(n)
    for idx, (_, params) in enumerate(mixture.components):
        mask = choice == idx
        out[mask] = weibull_quantile(u[mask], params[0], params[1])
    return out


def _entry_dates(spec: SimSpec, rng: np.random.Generator) -> np.ndarray:
    """Entry offsets in days from entry_start."""
    span = (spec.censor_date - spec.entry_start).days
    offsets = rng.integers(0, span, size=spec.n)
    if spec.entry_process == "boom_wave":
        boom_lo = (BOOM_WINDOW[0] - spec.entry_start).days
        boom_hi = (BOOM_WINDOW[1] - spec.entry_start).days
        in_boom = rng.random(spec.n) < BOOM_FRACTION
        offsets = np.where(in_boom,
                           rng.integers(boom_lo, boom_hi + 1, size=spec.n),
                           offsets)
    return offsets


def gen_mixture_spells(spec: SimSpec) -> list[OwnershipSpell]:
    """One synthetic parcel per spell; spells crossing the censor date are
    emitted censored. Deterministic per seed."""
    rng = rng_for(spec.seed, 4)
    years = sample_mixture_years(spec.mixture, spec.n, rng)
    days = np.maximum(np.rint(years * DAYS_PER_YEAR).astype(np.int64), 1)
    offsets = _entry_dates(spec, rng)
    spells = []
    for i in range(spec.n):
        entry = spec.entry_start + timedelta(days=int(offsets[i]))
        exit_date = entry + timedelta(days=int(days[i]))
        if exit_date >= spec.censor_date:
            duration = max((spec.censor_date - entry).days, 1)
            spells.append(OwnershipSpell(
                parcel_id=f"SIM{i:06d}", neighborhood="A", entry_date=entry,
                exit_date=None, duration_days=duration, censored=True))
        else:
            spells.append(OwnershipSpell(
                parcel_id=f"SIM{i:06d}", neighborhood="A", entry_date=entry,
                exit_date=exit_date, duration_days=int(days[i]), censored=False,
                exit_price=250_000.0, exit_deed_kind="warranty",
                exit_seller_is_builder=False))
    return spells


# ---------------------------------------------------------------------------
# synthetic survey with a controllable satisfaction dip


BASE_SATISFACTION = 4.3
NOISE_PROB = 0.30  # chance of a +/-1 perturbation


def gen_survey_synthetic(n: int, dip_start: float, dip_end: float,
                         dip_depth: float, seed: int = 0,
                         max_tenure: float = 30.0) -> list[SurveyResponse]:
    """Uniform tenures with a rectangular satisfaction dip.

    Expected satisfaction is 4.3 outside [dip_start, dip_end] and
    4.3 - dip_depth inside; values are stochastically rounded to the Likert
    grid, then perturbed by +/-1 with probability 0.3 and clamped to 1..5.
    ``dip_depth=0`` is the null generator (satisfaction independent of
    tenure). Deterministic per seed.
    """
    if not 0 < dip_start < dip_end:
        raise ValueError("need 0 < dip_start < dip_end")
    if not 0 <= dip_depth < 2:
        raise ValueError("dip_depth must lie in [0, 2)")
    rng = rng_for(seed, 5)
    tenure = rng.uniform(0.0, max_tenure, size=n)
    target = np.where((tenure >= dip_start) & (tenure <= dip_end),
                      BASE_SATISFACTION - dip_depth, BASE_SATISFACTION)
    floor = np.floor(target)
    sat = floor + (rng.random(n) < (target - floor))
    noise_mask = rng.random(n) < NOISE_PROB
    direction = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    sat = sat + noise_mask * direction
    sat = np.clip(sat, 1, 5).astype(int)
    fee_pairs = [(3, 3), (2, 3), (3, 4), (4, 2), (2, 4)]
    out = []
    for i in range(n):
        m, inc = fee_pairs[int(rng.integers(0, len(fee_pairs)))]
        out.append(SurveyResponse(
            respondent_id=f"SYN{i:05d}",
            neighborhood="A",
            satisfaction=int(sat[i]),
            minimize_fee_support=m,
            increase_fee_support=inc,
            tenure_years=float(tenure[i]),
            generation="Boomer",
            recommit=bool(sat[i] >= 4),
        ))
    return out
