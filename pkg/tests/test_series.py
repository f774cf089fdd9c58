import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from volcast.exceptions import DegenerateInputError, DomainError, InsufficientDataError, NumericalError
from volcast.series import (
    PriceSeries,
    ReturnSeries,
    acf,
    autocorrelations,
    durbin_levinson,
    log_returns,
    pacf,
    summary_stats,
)


class TestLogReturns:
    def test_constant(self):
        assert np.array_equal(log_returns([100, 100, 100]).values, [0.0, 0.0])

    def test_e(self):
        assert log_returns([1.0, math.e]).values[0] == pytest.approx(1.0, abs=1e-15)

    def test_known_values(self):
        # mpmath, 30 digits
        expected = [0.0953101798043248600439521232807, -0.105360515657826301227500980839]
        np.testing.assert_allclose(log_returns([100, 110, 99]).values, expected, rtol=1e-14)

    def test_length_and_dates(self):
        dates = [dt.date(2011, 1, 3), dt.date(2011, 1, 4), dt.date(2011, 1, 5)]
        r = log_returns(PriceSeries([10.0, 11.0, 12.0], dates))
        assert len(r) == 2
        assert r.origin_dates == tuple(dates[1:])

    @pytest.mark.parametrize("bad, index", [([1.0, 0.0, 2.0], 1), ([1.0, 2.0, -3.0], 2), ([np.nan, 1.0], 0)])
    def test_non_positive_price(self, bad, index):
        with pytest.raises(DomainError, match=f"index {index}"):
            log_returns(bad)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            log_returns([5.0])

    @given(arrays(np.float64, st.integers(1, 200), elements=st.floats(-0.5, 0.5)))
    def test_round_trip(self, x):
        prices = np.exp(np.concatenate([[0.0], np.cumsum(x)]))
        np.testing.assert_allclose(log_returns(prices).values, x, atol=1e-12, rtol=0)


def test_price_series_validation():
    with pytest.raises(ValueError, match="increasing"):
        PriceSeries([1.0, 2.0], [dt.date(2011, 1, 4), dt.date(2011, 1, 3)])
    with pytest.raises(DomainError):
        PriceSeries([1.0, -2.0])
    p = PriceSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        p.values[0] = 3.0


class TestACF:
    def test_lag_zero(self, rng):
        assert autocorrelations(rng.standard_normal(50), 3)[0] == 1.0

    def test_hand_computed(self):
        # deviations -2..2, sum of squares 10, lag-1 cross products 2+0+0+2
        assert acf([1, 2, 3, 4, 5], 1).coefficients[0] == pytest.approx(0.4, abs=1e-15)

    def test_white_noise(self):
        y = np.random.default_rng(7).standard_normal(10_000)
        res = acf(y, 20)
        assert np.all(np.abs(res.coefficients) < 4 / np.sqrt(y.size))
        assert res.confidence_band == pytest.approx(1.959964 / 100, rel=1e-6)
        assert list(res.lags) == list(range(1, 21))

    def test_bounds_and_errors(self, rng):
        y = rng.standard_normal(30)
        assert np.all(np.abs(acf(y, 29).coefficients) <= 1)
        with pytest.raises(ValueError):
            acf(y, 30)
        with pytest.raises(DegenerateInputError):
            acf(np.ones(10), 2)

    @settings(max_examples=50)
    @given(
        st.floats(0.1, 100) | st.floats(-100, -0.1),
        st.floats(-1e3, 1e3),
        st.integers(0, 2**32 - 1),
    )
    def test_affine_invariance(self, a, b, seed):
        y = np.random.default_rng(seed).standard_normal(60)
        np.testing.assert_allclose(acf(a * y + b, 10).coefficients, acf(y, 10).coefficients, atol=1e-10)

    def test_matches_statsmodels(self, rng):
        from statsmodels.tsa.stattools import acf as sm_acf

        y = rng.standard_normal(300)
        np.testing.assert_allclose(acf(y, 25).coefficients, sm_acf(y, nlags=25, fft=False)[1:], atol=1e-12)


def _pacf_yule_walker(y, L):
    r = autocorrelations(y, L)
    out = []
    for k in range(1, L + 1):
        R = np.array([[r[abs(i - j)] for j in range(k)] for i in range(k)])
        out.append(np.linalg.solve(R, r[1 : k + 1])[-1])
    return np.array(out)


class TestPACF:
    def test_lag_one_equals_acf(self, rng):
        y = rng.standard_normal(100)
        assert pacf(y, 5).coefficients[0] == acf(y, 5).coefficients[0]

    def test_yule_walker_agreement(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            y = rng.standard_normal(200).cumsum() * 0.1 + rng.standard_normal(200)
            np.testing.assert_allclose(pacf(y, 12).coefficients, _pacf_yule_walker(y, 12), atol=1e-8)

    def test_ar1_simulation(self):
        rng = np.random.default_rng(3)
        n = 20_000
        e = rng.standard_normal(n + 200)
        y = np.empty_like(e)
        y[0] = e[0]
        for t in range(1, e.size):
            y[t] = 0.5 * y[t - 1] + e[t]
        res = pacf(y[200:], 10)
        assert res.coefficients[0] == pytest.approx(0.5, abs=0.02)
        assert np.all(np.abs(res.coefficients[1:]) < 4 / np.sqrt(n))

    def test_white_noise_band_coverage(self):
        rng = np.random.default_rng(5)
        inside = []
        for _ in range(200):
            res = pacf(rng.standard_normal(400), 10)
            inside.extend(np.abs(res.coefficients) < res.confidence_band)
        assert 0.93 <= np.mean(inside) <= 0.97

    def test_breakdown(self):
        with pytest.raises(NumericalError):
            durbin_levinson(np.array([1.0, 1.0, 0.5]))


class TestSummary:
    def test_zeros(self):
        s = summary_stats([0.0, 0.0, 0.0])
        assert (s.mean, s.std) == (0.0, 0.0)

    def test_textbook(self):
        s = summary_stats([1.0, 2.0, 3.0])
        assert (s.mean, s.variance, s.n) == (2.0, 1.0, 3)

    def test_fixture_residuals(self):
        # frozen with the statistics module
        res = [0.52, -1.13, 0.08, 1.94, -0.67, -0.21, 0.75, -1.48, 0.33, 1.02, -0.09, -0.56]
        s = summary_stats(ReturnSeries(res))
        assert s.mean == pytest.approx(0.04166666666666667, abs=1e-15)
        assert s.variance == pytest.approx(0.9103060606060606, rel=1e-13)
        assert s.std == pytest.approx(0.9540996072769659, rel=1e-13)
        assert (s.min, s.max) == (-1.48, 1.94)

    def test_short(self):
        with pytest.raises(InsufficientDataError):
            summary_stats([1.0])
