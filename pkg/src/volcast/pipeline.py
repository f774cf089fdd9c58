"""
End-to-end volatility modelling run: identification, estimation, selection,
diagnostics and forecasting, recorded as a JSON report with CSV sidecars.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from volcast import arma as arma_mod
from volcast import garch as garch_mod
from volcast import stattests
from volcast.exceptions import ConvergenceError, DegenerateInputError
from volcast.io import read_prices_csv, sig6, write_correlogram_csv, write_rows_csv
from volcast.series import acf, log_returns, pacf, summary_stats

logger = logging.getLogger(__name__)

SCHEMA = "volcast/1"
ARMA_GRID = ((0, 1), (1, 0), (1, 1))

__all__ = ["PipelineOptions", "PipelineResult", "run_pipeline", "dump_report", "SCHEMA"]


@dataclass(frozen=True)
class PipelineOptions:
    lm_lags: int = 12
    lb_lags: int = 1
    lb_fitdf: int = 0
    demean: bool = False
    horizon: int = 30
    max_lag: int = 30
    alpha: float = 0.05
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    max_iter: int | None = None
    arma_grid: tuple[tuple[int, int], ...] = ARMA_GRID
    garch_grid: tuple[tuple[int, int], ...] = tuple((s.r, s.s) for s in garch_mod.CANDIDATE_SPECS)

    def optimizer_kwargs(self) -> dict:
        return {"f_tol": self.f_tol, "x_tol": self.x_tol, "max_iter": self.max_iter}


@dataclass
class PipelineResult:
    report: dict
    exit_code: int
    selected: garch_mod.GarchFit | None = None
    garch_fits: list = field(default_factory=list)
    arma_fits: list = field(default_factory=list)


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def run_pipeline(input_csv, out_dir=None, options: PipelineOptions | None = None) -> PipelineResult:
    """
    Run the full procedure on a ``date,close`` CSV.

    Steps, in order: log returns, ADF on levels and on returns, ACF/PACF,
    ARMA candidates with LM tests on their residuals, GARCH candidates, AIC
    selection among converged fits, LM / KS / Ljung-Box diagnostics on the
    selected model's standardized residuals, and a variance forecast.

    When ``out_dir`` is given, ``report.json`` and the CSV sidecars are
    written there.  The exit code is 0 on success, 2 when the selected model
    fails a diagnostic at level ``options.alpha`` and 3 when no GARCH fit
    converged.
    """
    opts = options or PipelineOptions()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    notes: list[str] = []

    prices = read_prices_csv(input_csv)
    returns = log_returns(prices)
    stats = summary_stats(returns)
    if stats.std == 0:
        raise DegenerateInputError("log returns have zero variance (constant prices)")
    y = returns.values

    report: dict = {
        "schema": SCHEMA,
        "input": {
            "file": os.path.basename(str(input_csv)),
            "sha256": _file_digest(input_csv),
            "n_prices": len(prices),
            "n_returns": len(returns),
            "start": prices.dates[0].isoformat(),
            "end": prices.dates[-1].isoformat(),
        },
        "options": {
            "lm_lags": opts.lm_lags,
            "lb_lags": opts.lb_lags,
            "lb_fitdf": opts.lb_fitdf,
            "demean": opts.demean,
            "horizon": opts.horizon,
            "max_lag": opts.max_lag,
            "alpha": opts.alpha,
            "f_tol": opts.f_tol,
            "x_tol": opts.x_tol,
            "max_iter": opts.max_iter,
        },
        "returns_summary": {k: sig6(v) for k, v in vars(stats).items() if k != "n"} | {"n": stats.n},
    }

    report["stationarity"] = {
        "levels": stattests.adf_test(prices.values).to_dict(),
        "returns": stattests.adf_test(y).to_dict(),
    }

    max_lag = min(opts.max_lag, len(y) - 1)
    acf_res, pacf_res = acf(y, max_lag), pacf(y, max_lag)
    report["correlograms"] = {"acf": "acf.csv", "pacf": "pacf.csv", "band": sig6(acf_res.confidence_band)}
    if out is not None:
        write_correlogram_csv(out / "acf.csv", acf_res)
        write_correlogram_csv(out / "pacf.csv", pacf_res)

    # ARMA candidates and the heteroskedasticity gate
    arma_rows, arma_fits = [], []
    any_arch = False
    for p, q in opts.arma_grid:
        spec = arma_mod.ArmaSpec(p, q, include_mean=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                fit = arma_mod.fit_arma(y, spec, **opts.optimizer_kwargs())
            except ConvergenceError as exc:
                fit = exc.result
        lm = stattests.lm_arch_test(fit.residuals, opts.lm_lags)
        any_arch |= lm.reject(opts.alpha)
        arma_fits.append(fit)
        arma_rows.append({"fit": fit.to_dict(), "lm_test": lm.to_dict()})
    report["arma"] = arma_rows
    if not any_arch:
        msg = "no ARCH effect detected in any ARMA residuals; a GARCH model is not justified"
        notes.append(msg)
        logger.warning(msg)

    # GARCH candidates
    garch_fits = []
    for r, s in opts.garch_grid:
        spec = garch_mod.GarchSpec(r, s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                fit = garch_mod.fit_garch(y, spec, demean=opts.demean, **opts.optimizer_kwargs())
            except ConvergenceError as exc:
                fit = exc.result
        garch_fits.append(fit)
    report["garch"] = [f.to_dict() for f in garch_fits]

    converged = [f for f in garch_fits if f.converged]
    if not converged:
        report["selection"] = None
        report["notes"] = notes + ["no GARCH candidate converged"]
        _write_report(out, report)
        return PipelineResult(report, 3, None, garch_fits, arma_fits)

    chosen = garch_mod.model_select(converged)
    report["selection"] = {
        "criterion": "min AIC, ties by max loglik then fewer parameters",
        "table": [
            {"model": row["model"], "aic": sig6(row["aic"]), "loglik": sig6(row["loglik"]), "k": row["k"]}
            for row in garch_mod.comparison_table(converged)
        ],
        "chosen": chosen.label,
    }

    z = chosen.std_residuals
    diag = {
        "lm_arch": stattests.lm_arch_test(z, opts.lm_lags),
        "ks_normality": stattests.ks_normality_test(z),
        "ljung_box": stattests.ljung_box_test(z, opts.lb_lags, opts.lb_fitdf),
    }
    failed = [name for name, res in diag.items() if res.reject(opts.alpha)]
    report["diagnostics"] = {
        "model": chosen.label,
        **{name: res.to_dict() for name, res in diag.items()},
        "failed": failed,
    }

    fc = garch_mod.forecast_variance(chosen, opts.horizon)
    report["forecast"] = {
        "model": chosen.label,
        "horizon": opts.horizon,
        "file": "forecast.csv",
        "first": sig6(fc.forecast_variance[0]),
        "last": sig6(fc.forecast_variance[-1]),
        "unconditional_variance": sig6(fc.unconditional_variance),
        "persistence": sig6(fc.persistence),
        "diverging": fc.diverging,
    }
    report["cond_variance_file"] = "cond_variance.csv"
    report["notes"] = notes
    if out is not None:
        write_rows_csv(out / "forecast.csv", ["h", "sigma2"], zip(fc.horizons.tolist(), fc.forecast_variance.tolist()))
        write_rows_csv(
            out / "cond_variance.csv",
            ["t", "sigma2"],
            zip(range(1, len(y) + 1), chosen.cond_variance.tolist()),
        )
    _write_report(out, report)
    return PipelineResult(report, 2 if failed else 0, chosen, garch_fits, arma_fits)


def _write_report(out: Path | None, report: dict) -> None:
    if out is None:
        return
    with open(out / "report.json", "w") as fh:
        fh.write(dump_report(report))
