"""
Unit-root, ARCH-effect, portmanteau and normality tests with their reference
distributions.

Every test returns a :class:`TestResult`.  The distribution functions are
implemented here directly (regularized incomplete gamma for chi-square tails,
the Kolmogorov series, the complementary error function for the normal) so
the p-value paths do not depend on an external statistics package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from volcast.exceptions import DegenerateInputError, InsufficientDataError, NumericalError
from volcast.series import autocorrelations

__all__ = [
    "TestResult",
    "DickeyFullerTable",
    "DF_TREND_TABLE",
    "adf_test",
    "lm_arch_test",
    "ljung_box_test",
    "ks_normality_test",
    "chi_square_sf",
    "regularized_gamma_q",
    "std_normal_cdf",
    "normal_two_sided_p",
    "kolmogorov_sf",
    "lilliefors_p_value",
]


@dataclass(frozen=True)
class TestResult:
    """
    Outcome of a hypothesis test.

    ``p_value_clamped`` is only ever set by table-interpolated tests (ADF),
    where a statistic beyond the table edge yields the edge probability.
    """

    __test__ = False  # keep pytest from collecting this class

    test_name: str
    statistic: float
    p_value: float
    df: float | None = None
    p_value_clamped: bool = False
    extras: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value!r} outside [0, 1]")

    def reject(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        from volcast.io import sig6

        out = {
            "test": self.test_name,
            "statistic": sig6(self.statistic),
            "df": None if self.df is None else sig6(self.df),
            "p_value": sig6(self.p_value),
            "clamped": self.p_value_clamped,
        }
        if self.extras:
            out["extras"] = {k: sig6(v) for k, v in self.extras.items()}
        return out


# --------------------------------------------------------------------------
# distribution functions


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_two_sided_p(t: float) -> float:
    """``2 * (1 - Phi(|t|))`` evaluated without cancellation."""
    return math.erfc(abs(t) / math.sqrt(2.0))


_GAMMA_EPS = 1e-16
_GAMMA_MAXITER = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, x)))
    return min(1.0, max(0.0, _gamma_q_contfrac(a, x)))


def chi_square_sf(x: float, df: float) -> float:
    """Upper-tail probability ``P(X > x)`` for ``X ~ chi-square(df)``."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    return regularized_gamma_q(0.5 * df, 0.5 * x)


def kolmogorov_sf(lam: float, tol: float = 1e-10) -> float:
    """
    Asymptotic Kolmogorov tail ``Q(lam) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)``.

    The alternating series is summed until a term falls below ``tol``.  Below
    ``lam = 1`` it converges too slowly to be useful, so the equivalent
    theta-function form ``1 - sqrt(2 pi)/lam sum exp(-(2k-1)^2 pi^2 / (8 lam^2))``
    is used there instead.
    """
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        s = 0.0
        k = 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
            s += term
            if term < tol:
                break
            k += 1
        p = 1.0 - math.sqrt(2.0 * math.pi) / lam * s
    else:
        s = 0.0
        k = 1
        while True:
            term = math.exp(-2.0 * k * k * lam * lam)
            s += term if k % 2 else -term
            if term < tol:
                break
            k += 1
        p = 2.0 * s
    return min(1.0, max(0.0, p))


def lilliefors_p_value(d: float, n: int) -> float:
    """
    Approximate Lilliefors p-value for the normal KS distance ``d``.

    Dallal-Wilkinson approximation, with the polynomial fits used by common
    statistical software for the region where it exceeds 0.1.
    """
    if n <= 100:
        kd, nd = d, n
    else:
        kd, nd = d * (n / 100.0) ** 0.49, 100
    p = math.exp(
        -7.01256 * kd**2 * (nd + 2.78019)
        + 2.99587 * kd * math.sqrt(nd + 2.78019)
        - 0.122119
        + 0.974598 / math.sqrt(nd)
        + 1.67997 / nd
    )
    if p > 0.1:
        kk = (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n)) * d
        if kk <= 0.302:
            p = 1.0
        elif kk <= 0.5:
            p = 2.76773 - 19.828315 * kk + 80.709644 * kk**2 - 138.55152 * kk**3 + 81.218052 * kk**4
        elif kk <= 0.9:
            p = -4.901232 + 40.662806 * kk - 97.490286 * kk**2 + 94.029866 * kk**3 - 32.355711 * kk**4
        elif kk <= 1.31:
            p = 6.198765 - 19.558097 * kk + 23.186922 * kk**2 - 12.733469 * kk**3 + 2.663075 * kk**4
        else:
            p = 1.0
    return min(1.0, max(0.0, p))


# --------------------------------------------------------------------------
# Dickey-Fuller table


@dataclass(frozen=True)
class DickeyFullerTable:
    """
    Critical values of the Dickey-Fuller t-statistic on a sample-size grid.

    ``critical[i, j]`` is the ``probs[j]`` quantile for sample size
    ``sizes[i]``.  Lookup interpolates linearly in sample size, then linearly
    from statistic to probability, holding the edge values outside the grid.
    """

    sizes: np.ndarray
    probs: np.ndarray
    critical: np.ndarray

    def __post_init__(self) -> None:
        crit = np.asarray(self.critical, dtype=float)
        if crit.shape != (len(self.sizes), len(self.probs)):
            raise ValueError("critical value table shape does not match its grids")
        if np.any(np.diff(crit, axis=1) <= 0):
            raise ValueError("critical values must increase with probability")

    def quantiles(self, n: float) -> np.ndarray:
        return np.array([np.interp(n, self.sizes, self.critical[:, j]) for j in range(len(self.probs))])

    def p_value(self, statistic: float, n: float) -> tuple[float, bool]:
        """Return ``(p, clamped)``; ``clamped`` is True when the statistic is off the table."""
        q = self.quantiles(n)
        if statistic < q[0]:
            return float(self.probs[0]), True
        if statistic > q[-1]:
            return float(self.probs[-1]), True
        return float(np.interp(statistic, q, self.probs)), False


# Fuller's (1976) table for the regression with constant and linear trend.
DF_TREND_TABLE = DickeyFullerTable(
    sizes=np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0]),
    probs=np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99]),
    critical=-np.array(
        [
            [4.38, 3.95, 3.60, 3.24, 1.14, 0.80, 0.50, 0.15],
            [4.15, 3.80, 3.50, 3.18, 1.19, 0.87, 0.58, 0.24],
            [4.04, 3.73, 3.45, 3.15, 1.22, 0.90, 0.62, 0.28],
            [3.99, 3.69, 3.43, 3.13, 1.23, 0.92, 0.64, 0.31],
            [3.98, 3.68, 3.42, 3.13, 1.24, 0.93, 0.65, 0.32],
            [3.96, 3.66, 3.41, 3.12, 1.25, 0.94, 0.66, 0.33],
        ]
    ),
)


def _ols(X: np.ndarray, y: np.ndarray):
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise NumericalError("regression matrix is singular")
    resid = y - X @ beta
    return beta, resid


def adf_test(series, lag_order: int | None = None) -> TestResult:
    """
    Augmented Dickey-Fuller test with constant and linear trend.

    Fits ``dy[t] = mu + b*t + g*y[t-1] + sum_i d_i*dy[t-i] + e[t]`` by OLS and
    reports the t-ratio of ``g``.  The p-value is read off
    :data:`DF_TREND_TABLE` and clamped to ``[0.01, 0.99]``.

    Parameters
    ----------
    series : array_like
    lag_order : int, optional
        Number of lagged differences; defaults to ``floor((n - 1) ** (1/3))``.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if lag_order is None:
        lag_order = int(math.floor((n - 1) ** (1.0 / 3.0) + 1e-12)) if n > 1 else 0
    k = int(lag_order)
    if k < 0:
        raise ValueError("lag_order must be non-negative")
    if n < k + 10:
        raise InsufficientDataError(f"ADF with {k} lags needs at least {k + 10} observations, got {n}")

    dy = np.diff(x)
    m = dy.size
    rows = np.arange(k, m)
    cols = [np.ones(rows.size), rows + 1.0, x[rows]]
    cols += [dy[rows - i] for i in range(1, k + 1)]
    X = np.column_stack(cols)
    yv = dy[rows]
    if X.shape[0] <= X.shape[1]:
        raise InsufficientDataError("not enough observations for the ADF regression")
    beta, resid = _ols(X, yv)
    dof = X.shape[0] - X.shape[1]
    s2 = resid @ resid / dof
    try:
        xtx_inv = np.linalg.inv(X.T @ X)
    except np.linalg.LinAlgError:
        raise NumericalError("regression matrix is singular") from None
    se = math.sqrt(s2 * xtx_inv[2, 2])
    if not se > 0:
        raise NumericalError("zero standard error for the lagged level coefficient")
    stat = float(beta[2] / se)
    p, clamped = DF_TREND_TABLE.p_value(stat, m)
    return TestResult(
        "adf",
        stat,
        p,
        df=None,
        p_value_clamped=clamped,
        extras={"lag_order": float(k), "nobs": float(X.shape[0])},
    )


def lm_arch_test(residuals, lags: int = 12) -> TestResult:
    """
    Engle's Lagrange-multiplier test for ARCH effects.

    Regresses ``e[t]**2`` on a constant and ``lags`` of its own lags; the
    statistic is ``rows * R**2`` with a chi-square(``lags``) reference.
    """
    e = np.asarray(residuals, dtype=float)
    if lags < 1:
        raise ValueError("lags must be a positive integer")
    n = e.size
    if n <= lags + 1:
        raise InsufficientDataError(f"LM test with {lags} lags needs more than {lags + 1} observations")
    e2 = e * e
    yv = e2[lags:]
    X = np.column_stack([np.ones(n - lags)] + [e2[lags - i : n - i] for i in range(1, lags + 1)])
    dev = yv - yv.mean()
    sst = dev @ dev
    if not sst > 0 or np.var(e) == 0:
        raise DegenerateInputError("squared residuals have zero variance")
    _, resid = _ols(X, yv)
    r2 = 1.0 - (resid @ resid) / sst
    stat = float(yv.size * r2)
    return TestResult(
        "lm_arch",
        stat,
        chi_square_sf(max(stat, 0.0), lags),
        df=float(lags),
        extras={"nobs": float(yv.size), "r_squared": float(r2)},
    )


def ljung_box_test(residuals, lags: int = 1, fitdf: int = 0) -> TestResult:
    """Ljung-Box portmanteau statistic ``n(n+2) sum_k r_k^2 / (n-k)``."""
    e = np.asarray(residuals, dtype=float)
    n = e.size
    if lags < 1:
        raise ValueError("lags must be a positive integer")
    if lags >= n:
        raise InsufficientDataError(f"lags={lags} must be smaller than the series length {n}")
    if fitdf < 0 or (fitdf and fitdf >= lags):
        raise ValueError("fitdf must be non-negative and smaller than lags")
    r = autocorrelations(e, lags)[1:]
    k = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(r * r / (n - k)))
    df = lags - fitdf
    return TestResult("ljung_box", q, chi_square_sf(q, df), df=float(df), extras={"lags": float(lags)})


def ks_normality_test(residuals, lilliefors: bool = False, standardize: bool = True) -> TestResult:
    """
    Kolmogorov-Smirnov test of standardized residuals against N(0, 1).

    The data are standardized by their sample mean and standard deviation
    unless ``standardize`` is False, in which case they are compared with
    N(0, 1) as given.
    The reported statistic is ``sqrt(n) * D``; its p-value comes from the
    asymptotic Kolmogorov distribution unless ``lilliefors`` is set, in which
    case the Dallal-Wilkinson approximation to the Lilliefors distribution is
    used instead.
    """
    e = np.asarray(residuals, dtype=float)
    n = e.size
    if n < 8:
        raise InsufficientDataError(f"KS test needs at least 8 observations, got {n}")
    mean = float(e.mean())
    sd = float(e.std(ddof=1))
    if sd == 0:
        raise DegenerateInputError("residuals have zero standard deviation")
    z = np.sort((e - mean) / sd if standardize else e)
    cdf = 0.5 * np.array([math.erfc(-v / math.sqrt(2.0)) for v in z])
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    lam = math.sqrt(n) * d
    p = lilliefors_p_value(d, n) if lilliefors else kolmogorov_sf(lam)
    return TestResult(
        "ks_normality",
        lam,
        p,
        extras={"D": d, "mean": mean, "sd": sd, "nobs": float(n)},
    )
