import numpy as np
import pytest

from tenurekit._seeding import rng_for
from tenurekit.simulate import weibull_quantile
from tenurekit.survival import (DAYS_PER_YEAR, KaplanMeierEstimator,
                                NelsonAalenEstimator, bootstrap_median_ci,
                                kaplan_meier_curve, log_rank_test,
                                median_tenure, nelson_aalen_curve)

YEARS = DAYS_PER_YEAR


def test_km_uncensored_steps():
    curve = kaplan_meier_curve([2, 4, 6, 8, 10], ci_method="none")
    np.testing.assert_allclose(curve.survival, [0.8, 0.6, 0.4, 0.2, 0.0])
    np.testing.assert_array_equal(curve.at_risk, [5, 4, 3, 2, 1])


def test_km_with_censoring_hand_product_limit():
    # events at 3 and 5, censored at 4: S(3)=2/3, S(5)=0
    curve = kaplan_meier_curve([3, 4, 5], [True, False, True], ci_method="none")
    np.testing.assert_allclose(curve.survival, [2 / 3, 0.0])
    np.testing.assert_array_equal(curve.times, [3, 5])


def test_km_all_censored_is_flat_one():
    curve = kaplan_meier_curve([7.0], [False])
    assert curve.times.size == 0
    assert curve.survival_at([1, 5, 100]).tolist() == [1.0, 1.0, 1.0]
    assert not median_tenure(curve).reached


def test_km_tie_handling_events_before_censorings():
    # censored-at-4 individual still counts in the risk set of the event at 4
    curve = kaplan_meier_curve([4, 4, 8], [True, False, True], ci_method="none")
    assert curve.at_risk[0] == 3
    np.testing.assert_allclose(curve.survival, [2 / 3, 0.0])


def test_km_equals_empirical_survival_without_censoring():
    rng = rng_for(7, 0)
    x = rng.integers(1, 50, size=200).astype(float)
    curve = kaplan_meier_curve(x, ci_method="none")
    for t in np.unique(x):
        np.testing.assert_allclose(curve.survival_at(t), np.mean(x > t))


def test_greenwood_bands_bracket_the_estimate():
    rng = rng_for(8, 0)
    x = weibull_quantile(rng.random(400), 1.5, 10.0)
    curve = kaplan_meier_curve(x)
    inner = slice(0, -1)  # S hits 0 at the last step, where the band degenerates
    assert np.all(curve.ci_lower[inner] <= curve.survival[inner] + 1e-12)
    assert np.all(curve.ci_upper[inner] >= curve.survival[inner] - 1e-12)


def test_median_tenure_step_convention():
    curve = kaplan_meier_curve(np.array([2, 4, 6, 8, 10]) * YEARS, ci_method="none")
    med = median_tenure(curve)
    assert med.reached
    assert med.value_years == pytest.approx(6.0)


def test_median_not_reached():
    curve = kaplan_meier_curve([5, 6], [False, False])
    assert median_tenure(curve).value_days is None


def test_nelson_aalen_single_step():
    curve = nelson_aalen_curve([2, 3, 4, 5], [True, False, False, False])
    np.testing.assert_allclose(curve.cumulative_hazard, [0.25])


def test_nelson_aalen_hand_sum():
    curve = nelson_aalen_curve([2, 4, 6, 8, 10])
    expected = 1 / 5 + 1 / 4 + 1 / 3 + 1 / 2 + 1.0
    assert curve.cumulative_hazard[-1] == pytest.approx(expected)


def test_nelson_aalen_no_events_is_flat():
    est = NelsonAalenEstimator().fit([3, 4], [False, False])
    assert est.event_times_.size == 0
    assert est.predict([1, 10]).tolist() == [0.0, 0.0]


def test_exp_neg_na_dominates_km_and_agrees_when_risk_sets_large():
    rng = rng_for(11, 0)
    x = weibull_quantile(rng.random(3000), 2.0, 12.0)
    cens = x > 10.0
    dur = np.minimum(x, 10.0)
    km = kaplan_meier_curve(dur, ~cens, ci_method="none")
    na = nelson_aalen_curve(dur, ~cens)
    s_na = np.exp(-na.cumulative_hazard)
    assert np.all(s_na >= km.survival - 1e-12)
    small_steps = na.events / na.at_risk < 0.05
    ratio = s_na[small_steps] / km.survival[small_steps]
    assert np.all(ratio < 1.02)


class TestBootstrapMedian:
    def test_degenerate_resampling_zero_width(self):
        dur = np.full(1000, 2500.0)
        mt = bootstrap_median_ci(dur, n_boot=300, seed=3)
        assert mt.ci_lower_days == mt.ci_upper_days == 2500.0

    def test_covers_analytic_weibull_median(self):
        rng = rng_for(42, 0)
        dur = weibull_quantile(rng.random(5000), 2.0, 12.0) * YEARS
        mt = bootstrap_median_ci(dur, n_boot=500, seed=1)
        lo, hi = mt.ci_years
        analytic = 12.0 * np.log(2.0) ** 0.5  # 9.9907 y
        assert lo <= analytic <= hi
        assert not mt.unstable

    def test_same_seed_identical(self):
        rng = rng_for(9, 0)
        dur = weibull_quantile(rng.random(300), 1.0, 8.0)
        a = bootstrap_median_ci(dur, n_boot=250, seed=5)
        b = bootstrap_median_ci(dur, n_boot=250, seed=5)
        assert (a.ci_lower_days, a.ci_upper_days) == (b.ci_lower_days, b.ci_upper_days)

    def test_unstable_flag_when_median_rarely_reached(self):
        dur = np.arange(1, 41).astype(float)
        evt = np.zeros(40, dtype=bool)
        evt[:2] = True  # S never falls near 0.5 in most resamples
        mt = bootstrap_median_ci(dur, evt, n_boot=200, seed=2)
        assert mt.unstable

    def test_rejects_small_b(self):
        with pytest.raises(ValueError):
            bootstrap_median_ci([1, 2, 3], n_boot=50, seed=0)


class TestLogRank:
    def test_identical_groups(self):
        g = [3, 5, 7, 9, 11]
        res = log_rank_test([g, g])
        assert res.statistic == pytest.approx(0.0, abs=1e-12)
        assert res.p_value == pytest.approx(1.0)

    def test_three_group_hand_computation(self):
        # n=12, uncensored; chi-square checked against the O-E sums computed
        # by hand from the risk-set table (frozen below)
        groups = [[2, 5, 8, 12], [3, 6, 9, 13], [4, 7, 10, 14]]
        res = log_rank_test(groups)
        assert res.df == 2
        assert res.statistic == pytest.approx(0.8550791888993676, rel=1e-10)
        assert res.p_value == pytest.approx(0.6521115814857669, rel=1e-9)

    def test_zero_event_group_warns(self):
        with pytest.warns(UserWarning, match="zero events"):
            res = log_rank_test([[2, 4, 6], [5, 6, 7]],
                                [[True, True, True], [False, False, False]])
        assert 0 <= res.p_value <= 1

    def test_separated_groups_tiny_p(self):
        rng = rng_for(13, 0)
        a = weibull_quantile(rng.random(2000), 2.0, 8.0)
        b = weibull_quantile(rng.random(2000), 2.0, 16.0)
        res = log_rank_test([a, b])
        assert res.p_value < 1e-50
        assert res.neg_log2_p > 160

    def test_null_p_values_uniform(self):
        # calibration: KS distance to U(0,1) below 0.05 over 1000 replicates
        ps = []
        for rep in range(1000):
            rng = rng_for(5000 + rep, 0)
            a = weibull_quantile(rng.random(80), 2.0, 12.0)
            b = weibull_quantile(rng.random(80), 2.0, 12.0)
            ps.append(log_rank_test([a, b]).p_value)
        ps = np.sort(ps)
        ks = np.max(np.abs(ps - np.arange(1, 1001) / 1000))
        assert ks < 0.05


def test_km_estimator_sklearn_face():
    est = KaplanMeierEstimator(conf_level=0.9)
    assert est.get_params() == {"conf_level": 0.9, "ci_method": "log-log"}
    est.fit([2, 4, 6, 8, 10])
    assert est.median_.value_days == 6
    np.testing.assert_allclose(est.predict([5]), [0.6])
