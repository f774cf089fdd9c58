import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from volcast.exceptions import DegenerateInputError, InsufficientDataError
from volcast.series import acf
from volcast.stattests import (
    DF_TREND_TABLE,
    DickeyFullerTable,
    TestResult,
    adf_test,
    chi_square_sf,
    kolmogorov_sf,
    ks_normality_test,
    lilliefors_p_value,
    ljung_box_test,
    lm_arch_test,
    normal_two_sided_p,
    regularized_gamma_q,
    std_normal_cdf,
)


class TestDistributions:
    def test_normal_cdf(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        xs = np.linspace(-8, 8, 161)
        np.testing.assert_allclose([std_normal_cdf(x) for x in xs], sps.norm.cdf(xs), atol=1e-12, rtol=0)

    def test_two_sided_p_reported(self):
        assert normal_two_sided_p(2.496) == pytest.approx(0.01254, abs=1e-4)

    def test_chi_square_reported_values(self):
        assert chi_square_sf(15.108, 12) == pytest.approx(0.2356, abs=1e-4)
        assert chi_square_sf(0.51046, 1) == pytest.approx(0.4749, abs=1e-4)

    def test_chi_square_zero(self):
        for k in (0.5, 1, 7, 40):
            assert chi_square_sf(0.0, k) == 1.0

    def test_chi_square_one_df_matches_normal(self):
        for x in np.linspace(0.0, 30.0, 100):
            assert chi_square_sf(x, 1) == pytest.approx(2 * (1 - std_normal_cdf(math.sqrt(x))), abs=1e-10)

    @pytest.mark.parametrize("df", [0.5, 1, 2, 3, 12, 50, 250])
    def test_chi_square_against_scipy(self, df):
        xs = np.concatenate([np.linspace(0, 3 * df + 30, 60), [1e-8, 1e-3]])
        got = [chi_square_sf(x, df) for x in xs]
        np.testing.assert_allclose(got, sps.chi2.sf(xs, df), atol=1e-10, rtol=0)

    @given(st.floats(0.1, 60), st.floats(0.0, 200), st.floats(1e-6, 10))
    def test_chi_square_monotone(self, df, x, dx):
        assert chi_square_sf(x + dx, df) <= chi_square_sf(x, df)

    def test_gamma_q_bounds(self):
        with pytest.raises(ValueError):
            regularized_gamma_q(0, 1)
        with pytest.raises(ValueError):
            chi_square_sf(-1, 3)

    def test_kolmogorov(self):
        # mpmath value of the series at 1.288
        assert kolmogorov_sf(1.288) == pytest.approx(0.0724550888180464, abs=1e-12)
        lams = np.linspace(0.05, 4, 200)
        np.testing.assert_allclose([kolmogorov_sf(v) for v in lams], sps.kstwobign.sf(lams), atol=1e-10)
        vals = [kolmogorov_sf(v) for v in lams]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert kolmogorov_sf(0.0) == 1.0


class TestDickeyFuller:
    def test_table_monotone(self):
        assert np.all(np.diff(DF_TREND_TABLE.critical, axis=1) > 0)
        with pytest.raises(ValueError):
            DickeyFullerTable(np.array([10.0]), np.array([0.1, 0.9]), np.array([[1.0, -1.0]]))

    def test_reported_mapping(self):
        # -2.2593 on about 1348 differences sits between the 10% and 90% columns
        p, clamped = DF_TREND_TABLE.p_value(-2.2593, 1348)
        assert p == pytest.approx(0.468, abs=1e-3)
        assert not clamped
        assert DF_TREND_TABLE.p_value(-10.238, 1348) == (0.01, True)
        assert DF_TREND_TABLE.p_value(3.0, 1348) == (0.99, True)

    def test_statistic_matches_statsmodels(self, rng):
        from statsmodels.tsa.stattools import adfuller

        y = np.cumsum(rng.standard_normal(500))
        res = adf_test(y)
        k = int(res.extras["lag_order"])
        assert k == 7
        sm = adfuller(y, maxlag=k, regression="ct", autolag=None)
        assert res.statistic == pytest.approx(sm[0], rel=1e-9)

    def test_clamped_implies_edge(self, rng):
        for _ in range(30):
            res = adf_test(rng.standard_normal(300))
            if res.p_value_clamped:
                assert res.p_value in (0.01, 0.99)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            adf_test(np.arange(12.0), lag_order=5)

    def test_power_and_size_small(self):
        rng = np.random.default_rng(0)
        rw = [adf_test(np.cumsum(rng.standard_normal(400))).p_value for _ in range(40)]
        wn = [adf_test(rng.standard_normal(400)).p_value for _ in range(40)]
        assert np.mean(np.array(rw) > 0.10) >= 0.8
        assert np.mean(np.array(wn) == 0.01) >= 0.9


def _r2_normal_equations(e, q):
    # independent least squares via normal equations on an explicit design
    e2 = np.asarray(e) ** 2
    rows = [[1.0] + [e2[t - i] for i in range(1, q + 1)] for t in range(q, e2.size)]
    X = np.array(rows)
    yv = e2[q:]
    beta = np.linalg.solve(X.T @ X, X.T @ yv)
    fitted = X @ beta
    return yv.size, 1 - np.sum((yv - fitted) ** 2) / np.sum((yv - yv.mean()) ** 2)


class TestLM:
    def test_statistic_identity(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            e = rng.standard_t(6, size=int(rng.integers(60, 400)))
            q = int(rng.integers(1, 13))
            res = lm_arch_test(e, q)
            rows, r2 = _r2_normal_equations(e, q)
            assert res.statistic == pytest.approx(rows * r2, abs=1e-8)
            assert res.df == q

    def test_matches_statsmodels(self, rng):
        from statsmodels.stats.diagnostic import het_arch

        e = rng.standard_normal(800)
        lm, lmp, _, _ = het_arch(e, nlags=12)
        res = lm_arch_test(e, 12)
        assert res.statistic == pytest.approx(lm, rel=1e-8)
        assert res.p_value == pytest.approx(lmp, abs=1e-10)

    def test_reported_lm_p(self):
        assert chi_square_sf(15.108, 12) == pytest.approx(0.2356, abs=1e-4)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            lm_arch_test(np.zeros(100), 3)
        with pytest.raises(DegenerateInputError):
            lm_arch_test(np.tile([1.0, -1.0], 50), 3)
        with pytest.raises(InsufficientDataError):
            lm_arch_test(np.ones(5), 4)


class TestLjungBox:
    X30 = [0.3, -0.8, 1.1, 0.4, -0.2, -1.5, 0.9, 0.7, -0.3, 0.05, 1.6, -0.4, -1.0, 0.2, 0.8,
           -0.6, 0.1, 1.3, -0.9, -0.25, 0.45, -1.2, 0.65, 0.15, -0.05, 1.05, -0.75, 0.35, -0.45, 0.55]

    @pytest.mark.parametrize(
        "h, q, p",
        # exact rational arithmetic for Q, mpmath for the tail probability
        [(1, 3.8643270229195568, 0.04932297045011342),
         (3, 9.288129192015576, 0.025695484559060865),
         (5, 12.707582166851374, 0.02627869803416765)],
    )
    def test_fixture(self, h, q, p):
        res = ljung_box_test(self.X30, h)
        assert res.statistic == pytest.approx(q, rel=1e-12)
        assert res.p_value == pytest.approx(p, abs=1e-10)

    def test_lag_one_formula(self, rng):
        for _ in range(10):
            e = rng.standard_normal(int(rng.integers(20, 500)))
            n = e.size
            r1 = acf(e, 1).coefficients[0]
            assert ljung_box_test(e, 1).statistic == pytest.approx(n * (n + 2) * r1**2 / (n - 1), abs=1e-12)

    def test_zero_autocorrelation(self):
        res = ljung_box_test([1.0, 0.0, -1.0, 0.0] * 5, 1)
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_reported_ljung_box_p(self):
        assert chi_square_sf(0.51046, 1) == pytest.approx(0.4749, abs=1e-4)

    def test_fitdf(self, rng):
        e = rng.standard_normal(200)
        assert ljung_box_test(e, 10, fitdf=2).df == 8
        with pytest.raises(ValueError):
            ljung_box_test(e, 3, fitdf=3)

    def test_matches_statsmodels(self, rng):
        from statsmodels.stats.diagnostic import acorr_ljungbox

        e = rng.standard_normal(300)
        sm = acorr_ljungbox(e, lags=[6])
        res = ljung_box_test(e, 6)
        assert res.statistic == pytest.approx(float(sm["lb_stat"].iloc[0]), rel=1e-10)
        assert res.p_value == pytest.approx(float(sm["lb_pvalue"].iloc[0]), abs=1e-10)


class TestKS:
    def test_reported_lambda(self):
        assert 0.069 <= kolmogorov_sf(1.288) <= 0.073
        assert kolmogorov_sf(1.288) == pytest.approx(0.071, abs=0.002)

    def test_perfect_fit(self):
        n = 200
        q = sps.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        res = ks_normality_test(q)
        assert res.extras["D"] < 2.0 / n
        assert res.p_value > 0.99

    def test_uniform_misfit(self):
        u = np.random.default_rng(1).uniform(size=1349)
        assert ks_normality_test(u, standardize=False).p_value < 1e-6
        # once standardized the population distance is only about 0.056
        assert ks_normality_test(u).p_value < 0.01

    def test_statistic_against_scipy(self, rng):
        e = rng.standard_normal(500) * 3 + 1
        z = (e - e.mean()) / e.std(ddof=1)
        d = sps.kstest(z, "norm").statistic
        res = ks_normality_test(e)
        assert res.extras["D"] == pytest.approx(d, abs=1e-12)
        assert res.statistic == pytest.approx(math.sqrt(500) * d, abs=1e-10)

    def test_lilliefors_matches_statsmodels_in_tail(self):
        from statsmodels.stats.diagnostic import lilliefors

        rng = np.random.default_rng(4)
        checked = 0
        for n in (40, 150, 1000):
            for _ in range(5):
                x = rng.standard_t(4, size=n)
                d, p_sm = lilliefors(x, pvalmethod="approx")
                if p_sm < 0.1:
                    assert lilliefors_p_value(d, n) == pytest.approx(p_sm, rel=1e-8)
                    assert ks_normality_test(x, lilliefors=True).p_value == pytest.approx(p_sm, rel=1e-8)
                    checked += 1
        assert checked >= 5

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            ks_normality_test(np.ones(20))
        with pytest.raises(InsufficientDataError):
            ks_normality_test(np.arange(5.0))


def test_result_json():
    res = TestResult("ljung_box", 0.510461234, 0.474912345, df=1.0)
    doc = json.loads(json.dumps(res.to_dict()))
    assert doc == {"test": "ljung_box", "statistic": 0.510461, "df": 1.0, "p_value": 0.474912, "clamped": False}
    with pytest.raises(ValueError):
        TestResult("x", 1.0, 1.5)
