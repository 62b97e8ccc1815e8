"""tenurekit: survival analysis of homeownership spells in planned communities."""

from .hazard import (AnnualizedHazardEstimator, HazardSeries, annualize_hazard,
                     daily_hazard, detect_peaks, rolling_trend)
from .impact import CIIResult, covid_impact_index, posterior_weight
from .ingest import (GenuineFilterPolicy, IngestResult, OwnershipSpell,
                     PeriodSegmentation, TransactionRecord, build_spells,
                     filter_genuine, parse_transactions, segment_periods,
                     spell_arrays)
from .parametric import (FamilyComparison, FitResult, MixtureDensityFitter,
                         MixtureModel, WeibullParams, compare_families,
                         eval_density, fit_mixture, nelder_mead, weibull_hazard)
from .stats import (RegressionFit, TestResult, anova_tukey, kruskal_wallis,
                    mann_whitney_u, ols_standardized, shapiro_wilk,
                    simple_linear_r2, welch_t)
from .survey import (PostStratifier, StratumWeight, SurveyResponse, TenureBinner,
                     WTPScore, aggregate_groups, encode_responses, post_stratify,
                     tenure_bin_search, wtp_score)
from .survival import (KaplanMeierEstimator, MedianTenure, NelsonAalenEstimator,
                       SurvivalCurve, bootstrap_median_ci, kaplan_meier_curve,
                       log_rank_test, median_tenure, nelson_aalen_curve)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
