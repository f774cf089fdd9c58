"""
Price and return containers, log returns, sample moments and correlograms.

Observations are assumed equally spaced (trading days); dates are carried as
metadata only and never enter a computation.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from volcast.exceptions import (
    DegenerateInputError,
    DomainError,
    InsufficientDataError,
    NumericalError,
)

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "CorrelogramResult",
    "SummaryStats",
    "log_returns",
    "acf",
    "pacf",
    "summary_stats",
    "autocorrelations",
    "WHITE_NOISE_Z",
]

# two-sided 95% normal quantile
WHITE_NOISE_Z = 1.959963984540054


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("series must be one-dimensional")
    arr.setflags(write=False)
    return arr


def _as_dates(dates, n: int) -> tuple[dt.date, ...] | None:
    if dates is None:
        return None
    out = tuple(d if isinstance(d, dt.date) else dt.date.fromisoformat(str(d)) for d in dates)
    if len(out) != n:
        raise ValueError(f"{len(out)} dates supplied for {n} values")
    return out


def _check_prices(values: np.ndarray) -> None:
    if values.size < 2:
        raise InsufficientDataError(f"need at least 2 prices, got {values.size}")
    bad = np.flatnonzero(~(values > 0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"price at index {i} is not strictly positive: {values[i]!r}")


@dataclass(frozen=True)
class PriceSeries:
    """Index levels, strictly positive, with optional strictly increasing dates."""

    values: np.ndarray
    dates: tuple[dt.date, ...] | None = None

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        _check_prices(values)
        dates = _as_dates(self.dates, values.size)
        if dates is not None and any(b <= a for a, b in zip(dates, dates[1:])):
            raise ValueError("dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns; ``origin_dates[t]`` is the date of the later price in pair ``t``."""

    values: np.ndarray
    origin_dates: tuple[dt.date, ...] | None = None

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin_dates", _as_dates(self.origin_dates, values.size))

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class CorrelogramResult:
    lags: np.ndarray
    coefficients: np.ndarray
    confidence_band: float
    kind: str = "acf"

    def rows(self):
        """Yield ``(lag, coefficient, band)`` tuples for export."""
        for lag, coef in zip(self.lags, self.coefficients):
            yield int(lag), float(coef), self.confidence_band


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float
    std: float
    min: float
    max: float
    n: int


def log_returns(prices: PriceSeries | Sequence[float]) -> ReturnSeries:
    """
    Log differences ``ln(P[t+1]) - ln(P[t])`` of a price series.

    Raises
    ------
    DomainError
        If any price is zero, negative or NaN; the message names its index.
    InsufficientDataError
        If fewer than two prices are given.
    """
    if isinstance(prices, PriceSeries):
        values, dates = prices.values, prices.dates
    else:
        values, dates = np.asarray(prices, dtype=float), None
        _check_prices(values)
    r = np.diff(np.log(values))
    return ReturnSeries(r, None if dates is None else dates[1:])


def _values(series) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return y


def autocorrelations(series, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelations for lags ``0..max_lag`` (lag 0 is exactly 1)."""
    y = _values(series)
    n = y.size
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if max_lag >= n:
        raise ValueError(f"max_lag={max_lag} must be smaller than the series length {n}")
    d = y - y.mean()
    denom = d @ d
    if denom == 0.0:
        raise DegenerateInputError("series has zero variance")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = (d[k:] @ d[:-k]) / denom
    return out


def acf(series, max_lag: int) -> CorrelogramResult:
    """
    Sample autocorrelation function for lags ``1..max_lag``.

    Uses the biased estimator (divisor ``n`` throughout) so the implied
    autocovariance sequence is positive semi-definite.  The band is the
    white-noise approximation ``+/- 1.96 / sqrt(n)``.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    r = autocorrelations(series, max_lag)
    n = len(_values(series))
    return CorrelogramResult(
        lags=np.arange(1, max_lag + 1),
        coefficients=r[1:],
        confidence_band=WHITE_NOISE_Z / np.sqrt(n),
        kind="acf",
    )


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """
    Partial autocorrelations from autocorrelations ``r[0..L]`` (``r[0] == 1``).

    Returns the ``L`` values ``phi_kk`` for ``k = 1..L``.
    """
    L = r.size - 1
    out = np.empty(L)
    if L == 0:
        return out
    phi = np.array([r[1]])
    out[0] = r[1]
    if abs(r[1]) >= 1.0:
        raise NumericalError("Durbin-Levinson breakdown at lag 1: |phi_11| >= 1")
    for k in range(2, L + 1):
        num = r[k] - phi @ r[k - 1:0:-1]
        den = 1.0 - phi @ r[1:k]
        if den <= 0.0:
            raise NumericalError(f"Durbin-Levinson breakdown at lag {k}: non-positive innovation variance")
        pkk = num / den
        if not abs(pkk) < 1.0:
            raise NumericalError(f"Durbin-Levinson breakdown at lag {k}: |phi_kk| >= 1")
        phi = np.append(phi - pkk * phi[::-1], pkk)
        out[k - 1] = pkk
    return out


def pacf(series, max_lag: int) -> CorrelogramResult:
    """Sample partial autocorrelations via Durbin-Levinson on the sample ACF."""
    if max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    r = autocorrelations(series, max_lag)
    n = len(_values(series))
    return CorrelogramResult(
        lags=np.arange(1, max_lag + 1),
        coefficients=durbin_levinson(r),
        confidence_band=WHITE_NOISE_Z / np.sqrt(n),
        kind="pacf",
    )


def summary_stats(series) -> SummaryStats:
    y = _values(series)
    if y.size < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {y.size}")
    var = float(y.var(ddof=1))
    return SummaryStats(
        mean=float(y.mean()),
        variance=var,
        std=float(np.sqrt(var)),
        min=float(y.min()),
        max=float(y.max()),
        n=int(y.size),
    )
