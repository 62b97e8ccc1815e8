import math

import numpy as np
import pytest

from tenurekit._seeding import rng_for
from tenurekit.impact import covid_impact_index, posterior_weight, round_half_up
from tenurekit.simulate import weibull_quantile

YEARS = 365.25


def weib(n, k, lam, seed):
    return weibull_quantile(rng_for(seed, 0).random(n), k, lam) * YEARS


class TestPosteriorWeight:
    def test_identical_distributions_near_half(self):
        pre = weib(1500, 2.0, 12.0, 1)
        post = weib(1500, 2.0, 12.0, 2)
        w = posterior_weight(pre, None, post, None, n_boot=1000, seed=3)
        assert w == pytest.approx(0.5, abs=0.06)

    def test_forced_separation_near_one(self):
        pre = weib(2000, 2.0, 12.0, 4) + 5 * YEARS
        post = weib(2000, 2.0, 12.0, 5)
        w = posterior_weight(pre, None, post, None, n_boot=1000, seed=6)
        assert w > 0.99

    def test_deterministic_per_seed(self):
        pre = weib(400, 2.0, 12.0, 7)
        post = weib(400, 2.0, 10.0, 8)
        a = posterior_weight(pre, None, post, None, seed=9)
        b = posterior_weight(pre, None, post, None, seed=9)
        assert a == b

    def test_b_floor(self):
        with pytest.raises(ValueError):
            posterior_weight([1, 2], None, [1, 2], None, n_boot=100)


class TestCII:
    def test_identical_sets_near_zero(self):
        x = weib(1200, 2.0, 12.0, 10)
        res = covid_impact_index(x, None, x.copy(), None, seed=11)
        assert res.relative_change == 0.0
        assert res.cii == pytest.approx(0.0, abs=0.02)

    def test_formula_arithmetic(self):
        # constructed pre=10y, post=8y exactly; rel change = 0.2
        pre = np.full(501, 10.0 * YEARS)
        post = np.full(501, 8.0 * YEARS)
        res = covid_impact_index(pre, None, post, None, seed=12)
        assert res.relative_change == pytest.approx(0.2)
        # degenerate sets resample to themselves: weight 1, cii = rel change
        assert res.posterior_weight == 1.0
        assert res.cii == pytest.approx(0.2)
        assert res.cii == pytest.approx(res.relative_change * res.posterior_weight)

    def test_unit_rescaling_invariance(self):
        pre = weib(900, 1.8, 13.0, 13)
        post = weib(900, 1.8, 10.0, 14)
        in_days = covid_impact_index(pre, None, post, None, seed=15)
        in_years = covid_impact_index(pre / YEARS, None, post / YEARS, None, seed=15)
        assert in_days.relative_change == pytest.approx(in_years.relative_change)
        assert in_days.cii == pytest.approx(in_years.cii, abs=1e-12)

    def test_sign_tracks_median_difference(self):
        pre = weib(900, 2.0, 10.0, 16)
        post = weib(900, 2.0, 14.0, 17)  # tenure grew
        res = covid_impact_index(pre, None, post, None, seed=18)
        assert res.relative_change < 0
        assert res.cii <= 0

    def test_monotonicity_in_post_durations(self):
        pre = weib(800, 2.0, 12.0, 19)
        post = weib(800, 2.0, 10.0, 20)
        base = covid_impact_index(pre, None, post, None, seed=21)
        longer = covid_impact_index(pre, None, post * 1.3, None, seed=21)
        assert longer.cii <= base.cii + 0.02

    def test_pre_median_unreached_flagged(self):
        pre_d = np.array([1000.0] * 50)
        pre_e = np.zeros(50, dtype=bool)  # all censored: median unreached
        post = weib(200, 2.0, 10.0, 22)
        res = covid_impact_index(pre_d, pre_e, post, None, seed=23)
        assert res.undefined
        assert math.isnan(res.cii)

    def test_rounding_rule(self):
        assert round_half_up(0.25, 1) == 0.3
        assert round_half_up(0.14999, 1) == 0.1
        assert round_half_up(0.15, 1) == 0.2
