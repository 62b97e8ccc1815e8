"""Hypothesis-test battery and regression kit.

Non-parametric tests (Mann-Whitney, Kruskal-Wallis) and Welch/ANOVA are
implemented directly on midranks so tie handling is explicit; tail
probabilities come from scipy.special, which evaluates the regularized
incomplete gamma/beta functions to near machine precision even for
p-values around 1e-25. The studentized-range distribution needed by
Tukey's HSD has no closed form and is integrated here by composite
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.stats import rankdata
from scipy.stats import shapiro as _scipy_shapiro

from ._seeding import rng_for
from ._validation import as_sample

P_FLOOR = 1e-300  # below this, p-values clamp and carry a "clamped" note


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test: statistic, p-value and context."""

    method: str
    statistic: float
    p_value: float
    df: float | None = None
    effect: float | None = None
    notes: tuple[str, ...] = ()

    @property
    def neg_log2_p(self) -> float:
        return float(-np.log2(max(self.p_value, P_FLOOR)))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p": self.p_value,
            "df": self.df,
            "effect": self.effect,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class PairwiseResult:
    group_a: str
    group_b: str
    statistic: float
    p_value: float
    mean_diff: float


@dataclass(frozen=True)
class RegressionFit:
    """Standardized OLS fit with heteroscedasticity-robust errors."""

    predictor_names: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    r_squared: float
    hc3_std_errors: np.ndarray
    vif: np.ndarray
    n: int

    def to_dict(self) -> dict:
        return {
            "predictors": list(self.predictor_names),
            "coefficients": self.coefficients.tolist(),
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "hc3_std_errors": self.hc3_std_errors.tolist(),
            "vif": self.vif.tolist(),
            "n": self.n,
        }


# ---------------------------------------------------------------------------
# tail probabilities


def chi2_sf(x: float, df: float) -> float:
    """Upper chi-square tail via the regularized upper incomplete gamma."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def t_sf(t: float, df: float) -> float:
    return float(special.stdtr(df, -abs(t)))


def f_sf(f_stat: float, df1: float, df2: float) -> float:
    if f_stat <= 0:
        return 1.0
    return float(special.fdtrc(df1, df2, f_stat))


def normal_sf(z: float) -> float:
    return float(0.5 * special.erfc(z / math.sqrt(2.0)))


def _clamp_p(p: float) -> tuple[float, tuple[str, ...]]:
    if p < P_FLOOR:
        return P_FLOOR, ("p_clamped",)
    return min(max(p, 0.0), 1.0), ()


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston approximation via scipy, seeded subsample for big n)


def shapiro_wilk(x, seed: int = 0, max_n: int = 5000) -> TestResult:
    """Shapiro-Wilk normality test (Royston polynomial approximation).

    Samples larger than ``max_n`` are reduced to a seeded random subsample,
    where the approximation is still calibrated.
    """
    arr = as_sample(x, "x", min_len=3)
    notes: tuple[str, ...] = ()
    if arr.size > max_n:
        rng = rng_for(seed, 0)
        arr = rng.choice(arr, size=max_n, replace=False)
        notes += ("subsampled",)
    if np.ptp(arr) == 0.0:
        return TestResult("shapiro_wilk", float("nan"), float("nan"),
                          notes=notes + ("degenerate_constant",))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        stat, p = _scipy_shapiro(arr)
    p, clamp_notes = _clamp_p(float(p))
    return TestResult("shapiro_wilk", float(stat), p, notes=notes + clamp_notes)


# ---------------------------------------------------------------------------
# Mann-Whitney U


def _u_count_distribution(m: int, n: int) -> np.ndarray:
    """Counts of arrangements per U value (tie-free null distribution).

    Coefficients of the Gaussian binomial [m+n choose m]_q, built by
    polynomial multiplication with (1-q^(n+i)) and exact division by
    (1-q^i). Counts stay below 2^53 up to m=n=20, so float64 is exact.
    """
    size = m * n + 1
    coef = np.zeros(size)
    coef[0] = 1.0
    for i in range(1, m + 1):
        shift = n + i
        if shift < size:
            coef[shift:] -= coef[:-shift].copy()
        for r in range(min(i, size)):
            coef[r::i] = np.cumsum(coef[r::i])
    return coef


def _mann_whitney_exact_ties(x: np.ndarray, y: np.ndarray, u_obs: float) -> float:
    """Exact two-sided p by enumerating group assignments (any tie pattern)."""
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    m = x.size
    offset = m * (m + 1) / 2.0
    mu = m * y.size / 2.0
    dev = abs(u_obs - mu) - 1e-12
    hits = 0
    total = 0
    for combo in itertools.combinations(range(pooled.size), m):
        u = ranks[list(combo)].sum() - offset
        if abs(u - mu) >= dev:
            hits += 1
        total += 1
    return hits / total


def mann_whitney_u(x, y, method: str = "auto") -> TestResult:
    """Two-sided Mann-Whitney U test with midranks.

    ``method``: "auto" picks the exact null distribution when the product of
    sample sizes is at most 400 (or either side has fewer than 3 values, where
    the normal approximation is meaningless); otherwise the tie-corrected
    normal approximation with continuity correction. "exact"/"normal" force a
    branch (used by the calibration tests).
    """
    xa = as_sample(x, "x")
    ya = as_sample(y, "y")
    m, n = xa.size, ya.size
    pooled = np.concatenate([xa, ya])
    ranks = rankdata(pooled)
    u_x = float(ranks[:m].sum() - m * (m + 1) / 2.0)
    has_ties = np.unique(pooled).size < pooled.size
    effect = 1.0 - 2.0 * u_x / (m * n)  # rank-biserial correlation

    if method == "auto":
        method = "exact" if (m * n <= 400 or min(m, n) < 3) else "normal"

    notes: tuple[str, ...] = ()
    if method == "exact":
        if not has_ties:
            counts = _u_count_distribution(m, n)
            total = counts.sum()
            # U is integer-valued without ties
            k = int(round(u_x))
            lower = counts[: k + 1].sum() / total
            upper = counts[k:].sum() / total
            p = min(1.0, 2.0 * min(lower, upper))
        elif math.comb(m + n, m) <= 200_000:
            p = _mann_whitney_exact_ties(xa, ya, u_x)
            notes += ("exact_with_ties",)
        else:
            method = "normal"
            notes += ("ties_fallback_normal",)
    if method == "normal":
        mu = m * n / 2.0
        tie_sum = 0.0
        if has_ties:
            _, tie_counts = np.unique(pooled, return_counts=True)
            tie_sum = float(np.sum(tie_counts**3 - tie_counts))
            notes += ("tie_corrected",)
        big_n = m + n
        var = (m * n / 12.0) * ((big_n + 1) - tie_sum / (big_n * (big_n - 1)))
        if var <= 0:
            return TestResult("mann_whitney_u", u_x, float("nan"), effect=effect,
                              notes=notes + ("degenerate_all_tied",))
        z = (abs(u_x - mu) - 0.5) / math.sqrt(var)
        z = max(z, 0.0)
        p = min(1.0, 2.0 * normal_sf(z))
    p, clamp_notes = _clamp_p(p)
    return TestResult("mann_whitney_u", u_x, p, effect=effect,
                      notes=notes + clamp_notes)


# ---------------------------------------------------------------------------
# Kruskal-Wallis


def kruskal_wallis(groups) -> TestResult:
    """Kruskal-Wallis H with midranks and tie correction."""
    arrays = [as_sample(g, f"group {i}") for i, g in enumerate(groups)]
    k = len(arrays)
    if k < 2:
        raise ValueError("kruskal_wallis needs at least 2 groups")
    pooled = np.concatenate(arrays)
    big_n = pooled.size
    if big_n < 5:
        raise ValueError("kruskal_wallis needs a total of at least 5 observations")
    ranks = rankdata(pooled)
    h = 0.0
    start = 0
    for arr in arrays:
        r = ranks[start : start + arr.size]
        h += r.sum() ** 2 / arr.size
        start += arr.size
    h = 12.0 / (big_n * (big_n + 1)) * h - 3.0 * (big_n + 1)
    _, tie_counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - np.sum(tie_counts**3 - tie_counts) / (big_n**3 - big_n)
    notes: tuple[str, ...] = ()
    if correction <= 0:
        # every observation identical: no rank variation to test
        return TestResult("kruskal_wallis", 0.0, 1.0, df=k - 1,
                          notes=("degenerate_all_tied",))
    if correction < 1.0:
        notes += ("tie_corrected",)
    h /= correction
    h = max(h, 0.0)
    p, clamp_notes = _clamp_p(chi2_sf(h, k - 1))
    return TestResult("kruskal_wallis", h, p, df=k - 1, notes=notes + clamp_notes)


# ---------------------------------------------------------------------------
# Welch's t


def welch_t(x, y) -> TestResult:
    xa = as_sample(x, "x", min_len=2)
    ya = as_sample(y, "y", min_len=2)
    vx = xa.var(ddof=1)
    vy = ya.var(ddof=1)
    diff = xa.mean() - ya.mean()
    if vx == 0.0 and vy == 0.0:
        if diff == 0.0:
            return TestResult("welch_t", 0.0, 1.0, notes=("degenerate_zero_variance",))
        return TestResult("welch_t", math.copysign(math.inf, diff), 0.0,
                          notes=("degenerate_zero_variance",))
    sx, sy = vx / xa.size, vy / ya.size
    se = math.sqrt(sx + sy)
    t = diff / se
    df = (sx + sy) ** 2 / (sx**2 / (xa.size - 1) + sy**2 / (ya.size - 1))
    p, clamp_notes = _clamp_p(2.0 * t_sf(t, df))
    # Cohen's d with pooled sd, for effect-size reporting
    pooled_sd = math.sqrt(((xa.size - 1) * vx + (ya.size - 1) * vy) / (xa.size + ya.size - 2))
    effect = diff / pooled_sd if pooled_sd > 0 else float("inf")
    return TestResult("welch_t", t, p, df=df, effect=effect, notes=clamp_notes)


# ---------------------------------------------------------------------------
# studentized range distribution (for Tukey's HSD)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gl_panels(lo: float, hi: float, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(lo, hi, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _range_cdf_std_normal(u: float, k: int) -> float:
    """P(range of k iid standard normals < u)."""
    if u <= 0:
        return 0.0
    z, w = _gl_panels(-8.5, u + 8.5, max(8, int(math.ceil((u + 17.0) / 2.0))))
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    inner = special.ndtr(z) - special.ndtr(z - u)
    vals = k * phi * np.power(inner, k - 1)
    return float(np.sum(w * vals))


def studentized_range_sf(q: float, k: int, df: float) -> float:
    """Upper tail of the studentized range Q(k, df) by double quadrature.

    The scale variable s = sqrt(chi2_df / df) is integrated over composite
    Gauss-Legendre panels between extreme chi-square quantiles; df above
    5000 uses the known normal-range limit.
    """
    if k < 2:
        raise ValueError("studentized range needs k >= 2")
    if q <= 0:
        return 1.0
    if df > 5000 or math.isinf(df):
        return 1.0 - _range_cdf_std_normal(q, k)
    s_lo = math.sqrt(2.0 * special.gammaincinv(df / 2.0, 1e-14) / df)
    s_hi = math.sqrt(2.0 * special.gammainccinv(df / 2.0, 1e-14) / df)
    s, w = _gl_panels(max(s_lo, 1e-12), s_hi, 16)
    log_c = (df / 2.0) * math.log(df) + (1.0 - df / 2.0) * math.log(2.0) \
        - special.gammaln(df / 2.0)
    log_dens = log_c + (df - 1.0) * np.log(s) - df * s * s / 2.0
    dens = np.exp(log_dens)
    inner = np.array([_range_cdf_std_normal(q * si, k) for si in s])
    cdf = float(np.sum(w * dens * inner))
    return min(max(1.0 - cdf, 0.0), 1.0)


# ---------------------------------------------------------------------------
# one-way ANOVA + Tukey-Kramer HSD


def anova_tukey(groups, labels=None) -> tuple[TestResult, list[PairwiseResult]]:
    """One-way F test followed by Tukey-Kramer pairwise comparisons.

    Unbalanced groups are allowed; pairwise p-values come from the
    studentized-range distribution.
    """
    arrays = [as_sample(g, f"group {i}", min_len=2) for i, g in enumerate(groups)]
    k = len(arrays)
    if k < 3:
        raise ValueError("anova_tukey needs at least 3 groups")
    if labels is None:
        labels = [str(i + 1) for i in range(k)]
    sizes = np.array([a.size for a in arrays], dtype=float)
    means = np.array([a.mean() for a in arrays])
    big_n = sizes.sum()
    grand = np.concatenate(arrays).mean()
    ss_between = float(np.sum(sizes * (means - grand) ** 2))
    ss_within = float(sum(((a - a.mean()) ** 2).sum() for a in arrays))
    df_b = k - 1
    df_w = big_n - k
    if ss_within == 0.0:
        f_stat = math.inf if ss_between > 0 else 0.0
        p = 0.0 if ss_between > 0 else 1.0
        anova = TestResult("anova_f", f_stat, p, df=df_b,
                           notes=("degenerate_zero_within_variance",))
        return anova, []
    ms_within = ss_within / df_w
    f_stat = (ss_between / df_b) / ms_within
    p, clamp_notes = _clamp_p(f_sf(f_stat, df_b, df_w))
    eta_sq = ss_between / (ss_between + ss_within)
    anova = TestResult("anova_f", f_stat, p, df=df_b, effect=eta_sq,
                       notes=clamp_notes)
    pairwise = []
    for i, j in itertools.combinations(range(k), 2):
        diff = means[i] - means[j]
        se = math.sqrt(ms_within / 2.0 * (1.0 / sizes[i] + 1.0 / sizes[j]))
        q = abs(diff) / se
        p_ij = studentized_range_sf(q, k, df_w)
        pairwise.append(PairwiseResult(labels[i], labels[j], q, p_ij, float(diff)))
    return anova, pairwise


# ---------------------------------------------------------------------------
# standardized OLS with HC3 and VIF


def _zscore(a: np.ndarray) -> np.ndarray:
    sd = a.std(ddof=1)
    if sd == 0:
        raise ValueError("cannot z-score a constant column")
    return (a - a.mean()) / sd


def ols_standardized(y, X, names=None) -> RegressionFit:
    """OLS on z-scored variables with HC3 robust errors and per-predictor VIF.

    Rank deficiency raises with the offending column names rather than
    silently pseudo-inverting.
    """
    ya = as_sample(y, "y")
    xa = np.asarray(X, dtype=float)
    if xa.ndim == 1:
        xa = xa[:, None]
    n, p = xa.shape
    if n != ya.size:
        raise ValueError("y and X have different numbers of rows")
    if n <= p + 1:
        raise ValueError(f"need n > predictors + 1, got n={n}, predictors={p}")
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(p))
    names = tuple(names)
    for j in range(p):
        if xa[:, j].std(ddof=1) == 0:
            raise ValueError(f"predictor {names[j]} is constant")
    z = np.column_stack([_zscore(xa[:, j]) for j in range(p)])
    zy = _zscore(ya)
    design = np.column_stack([np.ones(n), z])
    rank = np.linalg.matrix_rank(design)
    if rank < p + 1:
        corr = np.corrcoef(z, rowvar=False)
        offenders = sorted(
            {names[a] for a in range(p) for b in range(a + 1, p)
             if abs(corr[a, b]) > 1.0 - 1e-10}
            | {names[b] for a in range(p) for b in range(a + 1, p)
               if abs(corr[a, b]) > 1.0 - 1e-10}
        )
        raise ValueError(f"design matrix is rank deficient; collinear columns: "
                         f"{offenders or list(names)}")
    xtx_inv = np.linalg.inv(design.T @ design)
    beta = xtx_inv @ design.T @ zy
    fitted = design @ beta
    resid = zy - fitted
    ss_res = float(resid @ resid)
    ss_tot = float(((zy - zy.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    leverage = np.einsum("ij,jk,ik->i", design, xtx_inv, design)
    scale = resid / (1.0 - leverage)
    meat = design.T @ (design * (scale**2)[:, None])
    hc3 = xtx_inv @ meat @ xtx_inv
    se = np.sqrt(np.diag(hc3))
    vif = np.empty(p)
    if p == 1:
        vif[0] = 1.0
    else:
        for j in range(p):
            others = np.delete(z, j, axis=1)
            dj = np.column_stack([np.ones(n), others])
            bj, *_ = np.linalg.lstsq(dj, z[:, j], rcond=None)
            rj = z[:, j] - dj @ bj
            r2_j = 1.0 - float(rj @ rj) / float(((z[:, j]) ** 2).sum())
            vif[j] = 1.0 / max(1.0 - r2_j, 1e-12)
    return RegressionFit(
        predictor_names=names,
        coefficients=beta[1:],
        intercept=float(beta[0]),
        r_squared=float(np.clip(r2, 0.0, 1.0)),
        hc3_std_errors=se[1:],
        vif=np.maximum(vif, 1.0),
        n=n,
    )


def simple_linear_r2(x, y) -> float:
    """Squared Pearson correlation; NaN (with a warning) when degenerate."""
    xa = as_sample(x, "x", min_len=3)
    ya = as_sample(y, "y", min_len=3)
    if xa.size != ya.size:
        raise ValueError("x and y must have the same length")
    if xa.std() == 0 or ya.std() == 0:
        warnings.warn("simple_linear_r2 undefined for zero-variance input")
        return float("nan")
    r = np.corrcoef(xa, ya)[0, 1]
    return float(r * r)
