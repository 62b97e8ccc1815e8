"""Survey encodings, the willingness-to-pay composite, group aggregation,
post-stratification weights, and tenure-bin search for the satisfaction dip."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_sample
from .stats import welch_t

GENERATIONS = ("Silent", "Boomer", "GenX", "Millennial", "GenZ")

WTP_LABELS = {
    1: "UltraFrugal",
    2: "CautiouslyConservative",
    3: "BalancedBudgeter",
    4: "MaintenanceMinded",
    5: "CommunityInvestor",
}


@dataclass(frozen=True)
class WTPScore:
    score: int
    label: str


@dataclass(frozen=True)
class SurveyResponse:
    respondent_id: str
    neighborhood: str
    satisfaction: int
    minimize_fee_support: int
    increase_fee_support: int
    tenure_years: float | None = None
    generation: str | None = None
    recommit: bool | None = None
    amenity_usage: dict = field(default_factory=dict)

    @property
    def wtp(self) -> WTPScore:
        return wtp_score(self.minimize_fee_support, self.increase_fee_support)


@dataclass(frozen=True)
class StratumWeight:
    neighborhood: str
    population_share: float
    sample_share: float
    weight: float


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def wtp_score(minimize_fee_support: int, increase_fee_support: int) -> WTPScore:
    """Composite 1-5 willingness-to-pay score.

    Opposition to fee minimization and support for fee increases both push
    the score up: score = round(((6 - minimize) + increase) / 2), half-up.
    """
    m, i = int(minimize_fee_support), int(increase_fee_support)
    if not (1 <= m <= 5 and 1 <= i <= 5):
        raise ValueError("fee supports must be Likert values in 1..5")
    score = _round_half_up(((6 - m) + i) / 2.0)
    return WTPScore(score=score, label=WTP_LABELS[score])


# ---------------------------------------------------------------------------
# encoding


def encode_responses(table: pd.DataFrame, codebook: dict,
                     missing: str = "drop") -> list[SurveyResponse]:
    """Encode a raw survey table into responses using a codebook.

    The codebook maps each raw column to a field and an encoding kind:
    ``{"columns": {raw_name: {"field": ..., "kind": "ordinal"|"onehot"|
    "frequency"|"numeric"|"category", "mapping": {...}}}}``. Unmapped
    columns raise. ``missing`` is "drop" (default: the row is excluded from
    analyses needing that field) or "impute" (neighborhood-level mode for
    categorical fields, median for numeric ones).
    """
    columns = codebook.get("columns", {})
    unmapped = [c for c in table.columns if c not in columns]
    if unmapped:
        raise ValueError(f"codebook does not map columns: {unmapped}")

    frame = pd.DataFrame(index=table.index)
    for raw_name, spec in columns.items():
        if raw_name not in table.columns:
            raise ValueError(f"codebook column {raw_name!r} missing from table")
        kind = spec["kind"]
        col = table[raw_name]
        if kind in ("ordinal", "onehot", "frequency"):
            mapping = spec["mapping"]
            encoded = col.map(lambda v: mapping.get(v) if pd.notna(v) else None)
            bad = col.notna() & encoded.isna() & (col.astype(str).str.len() > 0)
            if bad.any():
                raise ValueError(
                    f"column {raw_name!r}: unmapped values "
                    f"{sorted(col[bad].unique().tolist())[:5]}")
            frame[spec["field"]] = encoded
        elif kind == "numeric":
            frame[spec["field"]] = pd.to_numeric(col, errors="coerce")
        elif kind == "category":
            frame[spec["field"]] = col.where(col.astype(str).str.len() > 0)
        else:
            raise ValueError(f"unknown encoding kind {kind!r}")

    if missing == "impute":
        for name in frame.columns:
            if name == "neighborhood":
                continue
            series = frame[name]
            if series.isna().any():
                if pd.api.types.is_numeric_dtype(series):
                    fill = series.groupby(frame["neighborhood"]).transform("median")
                else:
                    fill = frame.groupby("neighborhood")[name].transform(
                        lambda s: s.mode().iloc[0] if not s.mode().empty else None)
                frame[name] = series.fillna(fill)

    required = ("neighborhood", "satisfaction", "minimize_fee_support",
                "increase_fee_support")
    responses = []
    for idx, row in frame.iterrows():
        if any(pd.isna(row.get(f)) for f in required):
            continue  # unusable for every analysis
        tenure = row.get("tenure_years")
        recommit = row.get("recommit")
        responses.append(SurveyResponse(
            respondent_id=str(row.get("respondent_id", idx)),
            neighborhood=str(row["neighborhood"]),
            satisfaction=int(row["satisfaction"]),
            minimize_fee_support=int(row["minimize_fee_support"]),
            increase_fee_support=int(row["increase_fee_support"]),
            tenure_years=None if pd.isna(tenure) else float(tenure),
            generation=None if pd.isna(row.get("generation")) else str(row["generation"]),
            recommit=None if pd.isna(recommit) else bool(recommit),
        ))
    return responses


def responses_frame(responses) -> pd.DataFrame:
    return pd.DataFrame({
        "respondent_id": [r.respondent_id for r in responses],
        "neighborhood": [r.neighborhood for r in responses],
        "satisfaction": [r.satisfaction for r in responses],
        "wtp_score": [r.wtp.score for r in responses],
        "wtp_label": [r.wtp.label for r in responses],
        "tenure_years": [r.tenure_years for r in responses],
        "generation": [r.generation for r in responses],
        "recommit": [None if r.recommit is None else int(r.recommit)
                     for r in responses],
    })


# ---------------------------------------------------------------------------
# aggregation and weighting


def aggregate_groups(responses, group_by: str, weights=None,
                     min_group_n: int = 5, tenure_bins=None) -> pd.DataFrame:
    """Per-group (weighted) means of satisfaction and recommitment.

    ``group_by`` is one of neighborhood, generation, wtp_score, tenure_bin
    (the latter needs ``tenure_bins`` split points). Groups smaller than
    ``min_group_n`` are suppressed.
    """
    frame = responses_frame(responses)
    if group_by == "tenure_bin":
        if tenure_bins is None:
            raise ValueError("tenure_bin grouping needs tenure_bins split points")
        frame = frame.dropna(subset=["tenure_years"])
        edges = [-np.inf, *tenure_bins, np.inf]
        frame = frame.assign(tenure_bin=pd.cut(frame["tenure_years"], edges))
    elif group_by not in frame.columns:
        raise ValueError(f"unknown grouping field {group_by!r}")
    frame = frame.dropna(subset=[group_by])
    if frame.empty:
        raise ValueError("no groups to aggregate")
    if weights is not None:
        wmap = {w.neighborhood: w.weight for w in weights}
        frame = frame.assign(_w=frame["neighborhood"].map(wmap).fillna(1.0))
    else:
        frame = frame.assign(_w=1.0)

    def agg(sub: pd.DataFrame) -> pd.Series:
        w = sub["_w"].to_numpy()
        sat = sub["satisfaction"].to_numpy(dtype=float)
        rec = sub["recommit"].to_numpy(dtype=float)
        rec_mask = ~np.isnan(rec)
        return pd.Series({
            "mean_satisfaction": float(np.average(sat, weights=w)),
            "mean_recommit": float(np.average(rec[rec_mask], weights=w[rec_mask]))
            if rec_mask.any() else float("nan"),
            "n": int(len(sub)),
            "weight": float(w.mean()),
        })

    out = frame.groupby(group_by, observed=True).apply(agg, include_groups=False)
    out = out[out["n"] >= min_group_n]
    if out.empty:
        raise ValueError("all groups fell below the minimum size")
    return out.reset_index()


def post_stratify(responses, population_counts: dict[str, float]) -> list[StratumWeight]:
    """weight = population_share / sample_share per neighborhood.

    Every population stratum must have at least one response; weights are
    normalized so the weighted sample size equals n.
    """
    frame = responses_frame(responses)
    sample_counts = frame["neighborhood"].value_counts().to_dict()
    for nbhd, count in population_counts.items():
        if count <= 0:
            raise ValueError(f"population count for {nbhd} must be positive")
        if sample_counts.get(nbhd, 0) == 0:
            raise ValueError(f"cannot weight stratum {nbhd!r}: no responses")
    pop_total = sum(population_counts.values())
    n = sum(sample_counts.get(k, 0) for k in population_counts)
    raw = {}
    for nbhd, pop in population_counts.items():
        pop_share = pop / pop_total
        sample_share = sample_counts[nbhd] / n
        raw[nbhd] = (pop_share, sample_share, pop_share / sample_share)
    # normalize so sum(weight * sample_count) == n
    total_weighted = sum(raw[k][2] * sample_counts[k] for k in raw)
    scale = n / total_weighted
    return [StratumWeight(nbhd, ps, ss, w * scale)
            for nbhd, (ps, ss, w) in sorted(raw.items())]


class PostStratifier(BaseEstimator, TransformerMixin):
    """Transformer attaching post-stratification weights to a response frame.

    Parameters
    ----------
    population_counts : households per neighborhood in the population.
    """

    def __init__(self, population_counts: dict | None = None):
        self.population_counts = population_counts

    def fit(self, responses, y=None):
        if not self.population_counts:
            raise ValueError("population_counts is required")
        self.weights_ = post_stratify(responses, self.population_counts)
        self.weight_map_ = {w.neighborhood: w.weight for w in self.weights_}
        return self

    def transform(self, responses) -> pd.DataFrame:
        frame = responses_frame(responses)
        return frame.assign(weight=frame["neighborhood"].map(self.weight_map_))


# ---------------------------------------------------------------------------
# tenure-bin search


def tenure_bin_search(tenures, outcomes, min_bin_n: int = 30,
                      alpha: float = 0.01) -> list[float]:
    """Greedy recursive binary splitting of tenure against an outcome.

    At each node every admissible midpoint is scored with a Welch t-test
    between the two sides; the best split is kept only if its p-value stays
    below ``alpha`` after a Bonferroni correction for the number of
    candidates tried at that node (otherwise the familywise error across
    candidates would far exceed alpha). Returns sorted split points.
    """
    t = as_sample(tenures, "tenures")
    y = as_sample(outcomes, "outcomes")
    if t.size != y.size:
        raise ValueError("tenures and outcomes must have the same length")
    if t.size < 3 * min_bin_n:
        raise ValueError(f"need at least {3 * min_bin_n} observations")
    order = np.argsort(t, kind="mergesort")
    t, y = t[order], y[order]

    def best_split(lo: int, hi: int):
        """Best candidate split of t[lo:hi]; returns (p_adj, split_value)."""
        seg_t = t[lo:hi]
        seg_y = y[lo:hi]
        n = seg_t.size
        # candidate boundaries between distinct tenure values
        change = np.nonzero(np.diff(seg_t) > 0)[0] + 1
        cuts = change[(change >= min_bin_n) & (n - change >= min_bin_n)]
        if cuts.size == 0:
            return None
        csum = np.concatenate([[0.0], np.cumsum(seg_y)])
        csq = np.concatenate([[0.0], np.cumsum(seg_y**2)])
        n_l = cuts.astype(float)
        n_r = n - n_l
        mean_l = csum[cuts] / n_l
        mean_r = (csum[n] - csum[cuts]) / n_r
        var_l = (csq[cuts] - n_l * mean_l**2) / (n_l - 1)
        var_r = (csq[n] - csq[cuts] - n_r * mean_r**2) / (n_r - 1)
        var_l = np.maximum(var_l, 0.0)
        var_r = np.maximum(var_r, 0.0)
        se2 = var_l / n_l + var_r / n_r
        with np.errstate(divide="ignore", invalid="ignore"):
            tstat = np.abs(mean_l - mean_r) / np.sqrt(se2)
        tstat = np.where(se2 > 0, tstat, 0.0)
        best = int(np.argmax(tstat))
        idx = cuts[best]
        # exact Welch p for the winning candidate, Bonferroni over candidates
        res = welch_t(seg_y[:idx], seg_y[idx:])
        p_adj = min(res.p_value * cuts.size, 1.0)
        split_value = (seg_t[idx - 1] + seg_t[idx]) / 2.0
        return p_adj, float(split_value), idx

    splits: list[float] = []

    def recurse(lo: int, hi: int):
        if hi - lo < 2 * min_bin_n:
            return
        found = best_split(lo, hi)
        if found is None:
            return
        p_adj, value, idx = found
        if p_adj >= alpha:
            return
        splits.append(value)
        recurse(lo, lo + idx)
        recurse(lo + idx, hi)

    recurse(0, t.size)
    return sorted(splits)


class TenureBinner(BaseEstimator, TransformerMixin):
    """Significance-guided tenure binning as a transformer.

    ``fit(tenures, outcomes)`` finds the split points; ``transform`` maps
    tenures to integer bin ids.
    """

    def __init__(self, min_bin_n: int = 30, alpha: float = 0.01):
        self.min_bin_n = min_bin_n
        self.alpha = alpha

    def fit(self, tenures, outcomes):
        self.split_points_ = tenure_bin_search(
            tenures, outcomes, min_bin_n=self.min_bin_n, alpha=self.alpha)
        return self

    def transform(self, tenures) -> np.ndarray:
        t = np.asarray(tenures, dtype=float)
        return np.searchsorted(np.asarray(self.split_points_), t, side="right")
