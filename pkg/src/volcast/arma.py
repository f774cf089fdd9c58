"""
ARMA(p, q) with constant, estimated by conditional sum of squares.

Residuals follow::

    e[t] = y[t] - c - sum_i phi_i * y[t-i] - sum_j theta_j * e[t-j]

with pre-sample ``y`` set to the sample mean and pre-sample ``e`` set to zero.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from volcast.exceptions import (
    ConvergenceError,
    ConvergenceWarning,
    DegenerateInputError,
    InsufficientDataError,
    NumericalError,
    StationarityWarning,
)
from volcast.optim import ObjectiveSpec, invert_spd, minimize, numerical_hessian

__all__ = ["ArmaSpec", "ArmaFit", "fit_arma", "arma_residuals", "residuals"]

MAX_ORDER = 2


@dataclass(frozen=True)
class ArmaSpec:
    p: int
    q: int
    include_mean: bool = True
    d: int = 0

    def __post_init__(self) -> None:
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0 <= v <= MAX_ORDER:
                raise ValueError(f"{name}={v} outside the parsimony bound 0..{MAX_ORDER}")
        if self.d < 0:
            raise ValueError("d must be non-negative")
        if self.p + self.q == 0 and not self.include_mean:
            raise ValueError("model has no parameters: need p + q >= 1 or include_mean")

    @property
    def label(self) -> str:
        return f"ARIMA({self.p},{self.d},{self.q})"

    @property
    def param_names(self) -> list[str]:
        names = ["constant"] if self.include_mean else []
        names += [f"ar{i}" for i in range(1, self.p + 1)]
        names += [f"ma{j}" for j in range(1, self.q + 1)]
        return names

    @property
    def n_params(self) -> int:
        # the innovation variance counts as a parameter
        return self.p + self.q + int(self.include_mean) + 1


def arma_residuals(y, constant: float, ar, ma) -> np.ndarray:
    """CSS residuals of ``y`` for the given coefficients (see module docstring)."""
    y = np.asarray(y, dtype=float)
    ar = np.atleast_1d(np.asarray(ar, dtype=float))
    ma = np.atleast_1d(np.asarray(ma, dtype=float))
    n = y.size
    p = ar.size
    u = y - constant
    if p:
        padded = np.concatenate([np.full(p, y.mean()), y])
        for i in range(1, p + 1):
            u = u - ar[i - 1] * padded[p - i : p - i + n]
    if ma.size:
        return signal.lfilter([1.0], np.concatenate([[1.0], ma]), u)
    return u


@dataclass(frozen=True)
class ArmaFit:
    spec: ArmaSpec
    constant: float
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    residuals: np.ndarray
    sigma2: float
    loglik: float
    aic: float
    css: float
    std_errors: np.ndarray
    converged: bool
    stationary: bool = True
    invertible: bool = True
    data: np.ndarray = field(default=None, repr=False)

    @property
    def params(self) -> np.ndarray:
        head = [self.constant] if self.spec.include_mean else []
        return np.concatenate([head, self.ar_coeffs, self.ma_coeffs])

    def to_dict(self) -> dict:
        from volcast.io import sig6

        out = {"model": self.spec.label}
        for name, val, se in zip(self.spec.param_names, self.params, self.std_errors):
            out[name] = sig6(val)
            out[f"{name}_se"] = sig6(se)
        out.update(
            sigma2=sig6(self.sigma2),
            loglik=sig6(self.loglik),
            aic=sig6(self.aic),
            converged=self.converged,
        )
        return out


def _roots_outside_unit_circle(coeffs: np.ndarray, sign: float) -> bool:
    # polynomial 1 + sign*(c1 z + c2 z^2)
    if coeffs.size == 0 or not np.any(coeffs):
        return True
    poly = np.concatenate([[1.0], sign * coeffs])[::-1]
    return bool(np.all(np.abs(np.roots(poly)) > 1.0))


def _split(theta: np.ndarray, spec: ArmaSpec):
    k = int(spec.include_mean)
    c = theta[0] if k else 0.0
    return c, theta[k : k + spec.p], theta[k + spec.p :]


def fit_arma(
    series,
    spec: ArmaSpec,
    start=None,
    f_tol: float = 1e-10,
    x_tol: float = 1e-8,
    max_iter: int | None = None,
) -> ArmaFit:
    """
    Fit an ARMA(p, q) model by conditional sum of squares.

    The data are rescaled to unit standard deviation for the search and the
    constant is mapped back afterwards.  Stationarity and invertibility are
    not imposed; a :class:`StationarityWarning` is issued when the estimates
    fall outside the unit circle conditions.

    Parameters
    ----------
    series : array_like
        Observations, e.g. a :class:`~volcast.series.ReturnSeries`.
    spec : ArmaSpec
    start : array_like, optional
        Starting ``(constant, ar..., ma...)``; defaults to the sample mean and
        zero coefficients.

    Raises
    ------
    ConvergenceError
        If the simplex has not converged within its budget.  The best fit is
        attached as ``result``.
    """
    y = np.asarray(series, dtype=float)
    for _ in range(spec.d):
        y = np.diff(y)
    n = y.size
    n_coef = spec.p + spec.q + int(spec.include_mean)
    if n <= 10 * (spec.p + spec.q + 1):
        raise InsufficientDataError(f"{spec.label} needs more than {10 * (spec.p + spec.q + 1)} observations")
    scale = float(y.std())
    if scale == 0:
        raise DegenerateInputError("series has zero variance")
    z = y / scale

    def css_z(theta):
        c, ar, ma = _split(theta, spec)
        e = arma_residuals(z, c, ar, ma)
        return float(e @ e)

    if start is None:
        theta0 = np.zeros(n_coef)
        if spec.include_mean:
            theta0[0] = z.mean()
    else:
        theta0 = np.array(start, dtype=float)
        if spec.include_mean:
            theta0[0] /= scale
    obj = ObjectiveSpec(css_z, ("identity",) * n_coef)
    res = minimize(obj, theta0, f_tol=f_tol, x_tol=x_tol, max_iter=max_iter)

    theta = res.x.copy()
    if spec.include_mean:
        theta[0] *= scale
    c, ar, ma = _split(theta, spec)
    e = arma_residuals(y, c, ar, ma)
    css = float(e @ e)
    sigma2 = css / n
    loglik = -0.5 * n * (math.log(2.0 * math.pi * sigma2) + 1.0)

    def nll(th):
        cc, aa, mm = _split(th, spec)
        r = arma_residuals(y, cc, aa, mm)
        return 0.5 * n * (math.log(2.0 * math.pi * (r @ r) / n) + 1.0)

    try:
        cov = invert_spd(numerical_hessian(nll, theta))
        std_errors = np.sqrt(np.diag(cov))
    except NumericalError:
        std_errors = np.full(n_coef, np.nan)

    stationary = _roots_outside_unit_circle(np.asarray(ar), -1.0)
    invertible = _roots_outside_unit_circle(np.asarray(ma), 1.0)
    if not stationary:
        warnings.warn(f"{spec.label}: AR estimates are non-stationary", StationarityWarning, stacklevel=2)
    if not invertible:
        warnings.warn(f"{spec.label}: MA estimates are non-invertible", StationarityWarning, stacklevel=2)

    fit = ArmaFit(
        spec=spec,
        constant=float(c),
        ar_coeffs=np.asarray(ar, dtype=float).copy(),
        ma_coeffs=np.asarray(ma, dtype=float).copy(),
        residuals=e,
        sigma2=sigma2,
        loglik=loglik,
        aic=2 * spec.n_params - 2 * loglik,
        css=css,
        std_errors=std_errors,
        converged=res.converged,
        stationary=stationary,
        invertible=invertible,
        data=y,
    )
    if not res.converged:
        warnings.warn(f"{spec.label}: {res.message}", ConvergenceWarning, stacklevel=2)
        raise ConvergenceError(f"{spec.label} did not converge: {res.message}", result=fit)
    return fit


def residuals(fit: ArmaFit) -> np.ndarray:
    """Recompute the CSS residual sequence at the fitted coefficients."""
    return arma_residuals(fit.data, fit.constant, fit.ar_coeffs, fit.ma_coeffs)
