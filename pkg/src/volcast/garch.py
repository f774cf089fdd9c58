"""
GARCH(r, s) volatility models with Gaussian innovations.

The model for a zero-mean return series is::

    y[t]    = tau[t] * eps[t],    eps[t] ~ N(0, 1)
    tau2[t] = c + sum_{i=1..r} alpha_i * y[t-i]**2 + sum_{j=1..s} beta_j * tau2[t-j]

with ``c > 0`` and ``alpha_i, beta_j >= 0``.  ``r`` counts ARCH (alpha) terms
and ``s`` counts GARCH (beta) terms, so GARCH(1,2) has ``alpha_1, beta_1,
beta_2``.  Pre-sample values of ``y**2`` and ``tau2`` are set to the sample
mean of ``y**2``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from volcast.exceptions import (
    ConvergenceError,
    ConvergenceWarning,
    DegenerateInputError,
    DomainError,
    InsufficientDataError,
    NumericalError,
)
from volcast.optim import (
    BOUNDARY_TOL,
    ObjectiveSpec,
    invert_spd,
    minimize,
    numerical_hessian,
)
from volcast.series import ReturnSeries
from volcast.stattests import normal_two_sided_p

logger = logging.getLogger(__name__)

__all__ = [
    "GarchSpec",
    "GarchParams",
    "GarchFit",
    "VarianceForecast",
    "variance_recursion",
    "log_likelihood",
    "fit_garch",
    "garch_objective",
    "model_select",
    "comparison_table",
    "forecast_variance",
    "simulate_garch",
    "CANDIDATE_SPECS",
]

MAX_ORDER = 2
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, order=True)
class GarchSpec:
    r: int
    s: int

    def __post_init__(self) -> None:
        if not 1 <= self.r <= MAX_ORDER:
            raise ValueError(f"ARCH order r={self.r} must lie in 1..{MAX_ORDER} (parsimony bound)")
        if not 0 <= self.s <= MAX_ORDER:
            raise ValueError(f"GARCH order s={self.s} must lie in 0..{MAX_ORDER} (parsimony bound)")

    @property
    def label(self) -> str:
        return f"GARCH({self.r},{self.s})"

    @property
    def n_params(self) -> int:
        return 1 + self.r + self.s

    @property
    def param_names(self) -> list[str]:
        return ["c"] + [f"alpha{i}" for i in range(1, self.r + 1)] + [f"beta{j}" for j in range(1, self.s + 1)]


CANDIDATE_SPECS = (GarchSpec(1, 0), GarchSpec(1, 1), GarchSpec(1, 2), GarchSpec(2, 1))


@dataclass(frozen=True)
class GarchParams:
    c: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not (math.isfinite(self.c) and self.c > 0):
            raise DomainError(f"variance intercept c must be positive, got {self.c!r}")
        for name, vals in (("alpha", self.alphas), ("beta", self.betas)):
            for i, v in enumerate(vals, start=1):
                if not (math.isfinite(v) and v >= 0):
                    raise DomainError(f"{name}{i} must be non-negative, got {v!r}")
        if not self.alphas:
            raise DomainError("at least one alpha is required")

    @classmethod
    def from_vector(cls, spec: GarchSpec, x: Sequence[float]) -> "GarchParams":
        x = [float(v) for v in x]
        if len(x) != spec.n_params:
            raise ValueError(f"{spec.label} takes {spec.n_params} parameters, got {len(x)}")
        return cls(x[0], tuple(x[1 : 1 + spec.r]), tuple(x[1 + spec.r :]))

    @property
    def spec(self) -> GarchSpec:
        return GarchSpec(len(self.alphas), len(self.betas))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c, *self.alphas, *self.betas])

    @property
    def persistence(self) -> float:
        return float(sum(self.alphas) + sum(self.betas))

    @property
    def unconditional_variance(self) -> float | None:
        p = self.persistence
        return self.c / (1.0 - p) if p < 1.0 else None


def _recursion(c: float, alphas: np.ndarray, betas: np.ndarray, y2: np.ndarray, backcast: float) -> np.ndarray:
    n = y2.size
    r = alphas.size
    u = np.full(n, c)
    if r:
        padded = np.concatenate([np.full(r, backcast), y2])
        for i in range(1, r + 1):
            u += alphas[i - 1] * padded[r - i : r - i + n]
    if betas.size and np.any(betas):
        a = np.concatenate([[1.0], -betas])
        zi = signal.lfiltic([1.0], a, y=np.full(betas.size, backcast))
        out, _ = signal.lfilter([1.0], a, u, zi=zi)
        return out
    return u


def _nll(c, alphas, betas, y2) -> float:
    tau2 = _recursion(c, alphas, betas, y2, y2.mean())
    if not np.all(tau2 > 0):
        return math.inf
    return 0.5 * float(np.sum(LOG_2PI + np.log(tau2) + y2 / tau2))


def variance_recursion(params: GarchParams, y) -> np.ndarray:
    """Conditional variances ``tau2[t]`` for ``t = 0..n-1``."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise InsufficientDataError("empty series")
    y2 = y * y
    return _recursion(params.c, np.array(params.alphas), np.array(params.betas), y2, y2.mean())


def log_likelihood(params: GarchParams, y) -> float:
    """Gaussian log-likelihood summed over every observation."""
    y = np.asarray(y, dtype=float)
    tau2 = variance_recursion(params, y)
    return -0.5 * float(np.sum(LOG_2PI + np.log(tau2) + y * y / tau2))


def _split(x: np.ndarray, spec: GarchSpec):
    return x[0], x[1 : 1 + spec.r], x[1 + spec.r :]


def garch_objective(y, spec: GarchSpec) -> ObjectiveSpec:
    """
    Negative log-likelihood of ``y`` in constrained coordinates
    ``(c, alphas..., betas...)`` with a log transform on ``c`` and softplus
    transforms on the alphas and betas.
    """
    y2 = np.asarray(y, dtype=float) ** 2

    def f(x):
        c, a, b = _split(np.asarray(x, dtype=float), spec)
        return _nll(c, a, b, y2)

    return ObjectiveSpec(f, ("log",) + ("softplus",) * (spec.r + spec.s))


@dataclass(frozen=True)
class GarchFit:
    spec: GarchSpec
    params: GarchParams
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    cond_variance: np.ndarray
    std_residuals: np.ndarray
    loglik: float
    aic: float
    converged: bool
    se_reliable: bool = True
    boundary: tuple[bool, ...] = ()
    unconstrained_optimum: np.ndarray | None = field(default=None, repr=False)
    data: np.ndarray = field(default=None, repr=False)
    mean: float = 0.0
    message: str = ""

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    @property
    def label(self) -> str:
        return self.spec.label

    def estimate_table(self) -> list[dict]:
        """Rows of ``parameter, estimate, std_error, t_value, p_value``."""
        return [
            {
                "parameter": name,
                "estimate": float(est),
                "std_error": float(se),
                "t_value": float(t),
                "p_value": float(p),
            }
            for name, est, se, t, p in zip(
                self.spec.param_names, self.params.vector, self.std_errors, self.t_values, self.p_values
            )
        ]

    def to_dict(self) -> dict:
        from volcast.io import sig6

        return {
            "model": self.label,
            "parameters": [
                {k: (sig6(v) if k != "parameter" else v) for k, v in row.items()}
                for row in self.estimate_table()
            ],
            "loglik": sig6(self.loglik),
            "aic": sig6(self.aic),
            "persistence": sig6(self.params.persistence),
            "converged": self.converged,
            "se_reliable": self.se_reliable,
            "boundary": [name for name, b in zip(self.spec.param_names, self.boundary) if b],
        }


def _start_point(y: np.ndarray, spec: GarchSpec) -> np.ndarray:
    x = [0.1 * float(np.var(y))]
    x += [0.1 / spec.r] * spec.r
    if spec.s:
        x += [0.7 / spec.s] * spec.s
    return np.array(x)


def fit_garch(
    y,
    spec: GarchSpec,
    demean: bool = False,
    start=None,
    f_tol: float = 1e-10,
    x_tol: float = 1e-8,
    max_iter: int | None = None,
) -> GarchFit:
    """
    Maximum-likelihood estimation of a GARCH(r, s) model.

    The search runs on ``y / rms(y)`` for conditioning; estimates are mapped
    back to the original scale.  Standard errors come from the inverse
    numerical Hessian of the negative log-likelihood in the original
    coordinates, and p-values from the two-sided standard normal.  Estimates
    of alpha or beta below ``1e-8`` are reported as exactly zero and flagged
    in ``boundary``.

    Parameters
    ----------
    y : array_like
        Return series.  It is not demeaned unless ``demean`` is set.
    spec : GarchSpec
    start : array_like, optional
        Start ``(c, alphas..., betas...)`` in original units.  The default is
        ``c = 0.1 var(y)``, ``alpha_i = 0.1 / r``, ``beta_j = 0.7 / s``.

    Raises
    ------
    ConvergenceError
        When the optimizer exhausts its budget; the best fit, with
        ``converged=False``, is attached as ``result``.
    """
    y = np.array(y, dtype=float)
    if y.size < 100:
        raise InsufficientDataError(f"GARCH estimation needs at least 100 observations, got {y.size}")
    mean = 0.0
    if demean:
        mean = float(y.mean())
        y = y - mean
    scale = math.sqrt(float(np.mean(y * y)))
    if scale == 0:
        raise DegenerateInputError("returns are identically zero")
    z = y / scale
    obj_z = garch_objective(z, spec)

    if start is None:
        x0 = _start_point(z, spec)
    else:
        x0 = np.array(start, dtype=float)
        if x0.shape != (spec.n_params,):
            raise ValueError(f"{spec.label} start must have {spec.n_params} entries")
        x0[0] /= scale * scale
        x0[1:] = np.maximum(x0[1:], 1e-10)
    res = minimize(obj_z, x0, f_tol=f_tol, x_tol=x_tol, max_iter=max_iter)

    x = res.x.copy()
    x[0] *= scale * scale
    boundary = (False,) + tuple(bool(v < BOUNDARY_TOL) for v in x[1:])
    x[1:][np.array(boundary[1:], dtype=bool)] = 0.0
    params = GarchParams.from_vector(spec, x)
    u_opt = res.x_unconstrained.copy()
    u_opt[0] += 2.0 * math.log(scale)

    y2 = y * y

    def nll(v):
        c, a, b = _split(np.asarray(v, dtype=float), spec)
        return _nll(c, a, b, y2)

    se_reliable = True
    try:
        # a 1e-10 floor at a zero-valued alpha/beta only measures roundoff
        min_step = np.r_[1e-10, np.full(spec.r + spec.s, 1e-6)]
        cov = invert_spd(numerical_hessian(nll, x, min_step=min_step))
        std_errors = np.sqrt(np.diag(cov))
    except NumericalError as exc:
        logger.info("%s: standard errors unavailable (%s)", spec.label, exc)
        std_errors = np.full(spec.n_params, np.nan)
        se_reliable = False
    with np.errstate(invalid="ignore", divide="ignore"):
        t_values = x / std_errors
    p_values = np.array([normal_two_sided_p(t) if np.isfinite(t) else np.nan for t in t_values])

    tau2 = variance_recursion(params, y)
    loglik = log_likelihood(params, y)
    fit = GarchFit(
        spec=spec,
        params=params,
        std_errors=std_errors,
        t_values=t_values,
        p_values=p_values,
        cond_variance=tau2,
        std_residuals=y / np.sqrt(tau2),
        loglik=loglik,
        aic=2 * spec.n_params - 2 * loglik,
        converged=res.converged,
        se_reliable=se_reliable,
        boundary=boundary,
        unconstrained_optimum=u_opt,
        data=y,
        mean=mean,
        message=res.message,
    )
    if not res.converged:
        warnings.warn(f"{spec.label}: {res.message}", ConvergenceWarning, stacklevel=2)
        raise ConvergenceError(f"{spec.label} did not converge: {res.message}", result=fit)
    return fit


def _selection_key(fit):
    return (fit.aic, -fit.loglik, fit.n_params, getattr(fit, "label", ""))


def model_select(fits: Sequence[GarchFit]) -> GarchFit:
    """
    Pick the fit with the smallest AIC.

    Ties go to the larger log-likelihood, then to fewer parameters.  The full
    comparison is logged at INFO level; see :func:`comparison_table`.
    """
    fits = list(fits)
    if not fits:
        raise ValueError("model_select needs at least one fit")
    for row in comparison_table(fits):
        logger.info("%(model)s  AIC=%(aic).4f  LL=%(loglik).4f", row)
    return min(fits, key=_selection_key)


def comparison_table(fits: Sequence[GarchFit]) -> list[dict]:
    """AIC/LL rows sorted from best to worst."""
    return [
        {"model": getattr(f, "label", ""), "aic": float(f.aic), "loglik": float(f.loglik), "k": int(f.n_params)}
        for f in sorted(fits, key=_selection_key)
    ]


@dataclass(frozen=True)
class VarianceForecast:
    horizons: np.ndarray
    forecast_variance: np.ndarray
    unconditional_variance: float | None
    persistence: float
    diverging: bool = False


def _forecast(params: GarchParams, y: np.ndarray, tau2: np.ndarray, horizon: int) -> np.ndarray:
    alphas = np.array(params.alphas)
    betas = np.array(params.betas)
    n = y.size
    backcast = float(np.mean(y * y))
    # squared returns and variances indexed so that position n is the first forecast
    sq = np.concatenate([y * y, np.empty(horizon)])
    var = np.concatenate([tau2, np.empty(horizon)])

    def past(arr, t):
        return arr[t] if t >= 0 else backcast

    for h in range(horizon):
        t = n + h
        v = params.c
        for i, a in enumerate(alphas, start=1):
            v += a * past(sq, t - i)
        for j, b in enumerate(betas, start=1):
            v += b * past(var, t - j)
        var[t] = v
        sq[t] = v  # E[y^2] equals the forecast variance beyond the sample
    return var[n:]


def forecast_variance(fit: GarchFit, horizon: int) -> VarianceForecast:
    """
    Iterate the variance recursion ``horizon`` steps past the sample.

    The one-step forecast uses the observed last returns and variances; later
    steps replace unknown squared returns by their forecasts.
    """
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    if not fit.converged:
        raise ValueError("cannot forecast from a fit that did not converge")
    return forecast_from_params(fit.params, fit.data, horizon, tau2=fit.cond_variance)


def forecast_from_params(params: GarchParams, y, horizon: int, tau2=None) -> VarianceForecast:
    """As :func:`forecast_variance` for given parameters and data."""
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    y = np.asarray(y, dtype=float)
    if tau2 is None:
        tau2 = variance_recursion(params, y)
    fc = _forecast(params, y, np.asarray(tau2, dtype=float), horizon)
    pers = params.persistence
    return VarianceForecast(
        horizons=np.arange(1, horizon + 1),
        forecast_variance=fc,
        unconditional_variance=params.unconditional_variance,
        persistence=pers,
        diverging=pers >= 1.0,
    )


def simulate_garch(params: GarchParams, n: int, seed: int, burn: int = 500) -> ReturnSeries:
    """
    Simulate ``n`` returns from a Gaussian GARCH process.

    ``burn`` leading draws are discarded.  The recursion starts at the
    unconditional variance when persistence is below one, otherwise at ``c``.
    Output depends only on ``(params, n, seed, burn)``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(n + burn)
    alphas, betas = params.alphas, params.betas
    r, s = len(alphas), len(betas)
    init = params.unconditional_variance or params.c
    lag = max(r, s, 1)
    y2 = [init] * lag
    tau2 = [init] * lag
    out = np.empty(n + burn)
    for t in range(n + burn):
        v = params.c
        for i in range(r):
            v += alphas[i] * y2[-1 - i]
        for j in range(s):
            v += betas[j] * tau2[-1 - j]
        yt = math.sqrt(v) * eps[t]
        out[t] = yt
        y2.append(yt * yt)
        tau2.append(v)
        del y2[0], tau2[0]
    return ReturnSeries(out[burn:])
