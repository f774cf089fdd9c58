"""
Command-line front end.

Subcommands::

    volcast pipeline prices.csv --out-dir report/
    volcast fit prices.csv --model garch --order 1,2
    volcast simulate --spec 2e-6,0.2,0.7 --order 1,1 --n 1349 --seed 42 --out sim.csv
    volcast forecast prices.csv --order 1,1 --horizon 30

Exit codes: 0 success, 1 bad input or arguments, 2 selected model failed a
diagnostic, 3 no GARCH candidate converged.
"""
from __future__ import annotations

import argparse
import datetime as dt
import logging
import math
import os
import sys
import warnings

import numpy as np

from volcast import arma as arma_mod
from volcast import garch as garch_mod
from volcast import stattests
from volcast.exceptions import ConvergenceError, VolcastError
from volcast.io import format_float, read_prices_csv, write_prices_csv, write_rows_csv
from volcast.pipeline import SCHEMA, PipelineOptions, dump_report, run_pipeline
from volcast.series import PriceSeries, log_returns

TRADING_DAYS = 252
SIM_START = dt.date(2011, 1, 3)

EXIT_OK, EXIT_INPUT, EXIT_DIAGNOSTIC, EXIT_NO_FIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _color(text: str, code: str) -> str:
    if os.environ.get("VOLCAST_NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _order(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"order must look like 'a,b', got {text!r}") from None
    return a, b


def _check_parsimony(a: int, b: int, model: str) -> None:
    lo = 1 if model == "garch" else 0
    if not (lo <= a <= 2 and 0 <= b <= 2):
        raise UsageError(
            f"order ({a},{b}) violates the parsimony constraint: "
            f"{model} orders are limited to at most 2 (first index >= {lo})"
        )


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f-tol", type=float, default=1e-10, help="relative simplex function spread tolerance")
    p.add_argument("--x-tol", type=float, default=1e-8, help="simplex vertex spread tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="simplex iterations per pass (default 5000*dim)")


def _add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lm-lags", type=int, default=12)
    p.add_argument("--lb-lags", type=int, default=1)
    p.add_argument("--lb-fitdf", type=int, default=0)
    p.add_argument("--demean", action="store_true", help="subtract the sample mean before GARCH fitting")


def _opt_kwargs(args) -> dict:
    return {"f_tol": args.f_tol, "x_tol": args.x_tol, "max_iter": args.max_iter}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_pipeline(args) -> int:
    if args.horizon < 1:
        raise UsageError("--horizon must be a positive integer")
    opts = PipelineOptions(
        lm_lags=args.lm_lags,
        lb_lags=args.lb_lags,
        lb_fitdf=args.lb_fitdf,
        demean=args.demean,
        horizon=args.horizon,
        max_lag=args.max_lag,
        f_tol=args.f_tol,
        x_tol=args.x_tol,
        max_iter=args.max_iter,
    )
    result = run_pipeline(args.input, args.out_dir, opts)
    rep = result.report
    if result.exit_code == EXIT_NO_FIT:
        print(_color("no GARCH candidate converged", "31"), file=sys.stderr)
        return EXIT_NO_FIT
    for note in rep.get("notes", []):
        print(_color(f"warning: {note}", "33"), file=sys.stderr)
    diag = rep["diagnostics"]
    print(f"selected {rep['selection']['chosen']}", file=sys.stderr)
    for name in ("lm_arch", "ks_normality", "ljung_box"):
        ok = name not in diag["failed"]
        flag = _color("pass", "32") if ok else _color("FAIL", "31")
        print(f"  {name:<13} p={diag[name]['p_value']:<10} {flag}", file=sys.stderr)
    return result.exit_code


def _diagnostics(resid, args) -> dict:
    return {
        "lm_arch": stattests.lm_arch_test(resid, args.lm_lags).to_dict(),
        "ks_normality": stattests.ks_normality_test(resid).to_dict(),
        "ljung_box": stattests.ljung_box_test(resid, args.lb_lags, args.lb_fitdf).to_dict(),
    }


def cmd_fit(args) -> int:
    a, b = _order(args.order)
    _check_parsimony(a, b, args.model)
    y = log_returns(read_prices_csv(args.input)).values
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            if args.model == "arma":
                fit = arma_mod.fit_arma(y, arma_mod.ArmaSpec(a, b), **_opt_kwargs(args))
            else:
                fit = garch_mod.fit_garch(y, garch_mod.GarchSpec(a, b), demean=args.demean, **_opt_kwargs(args))
        except ConvergenceError as exc:
            fit = exc.result
    resid = fit.residuals if args.model == "arma" else fit.std_residuals
    doc = {"schema": SCHEMA, "fit": fit.to_dict(), "diagnostics": _diagnostics(resid, args)}
    _emit(dump_report(doc), args.out)
    return EXIT_OK if fit.converged else EXIT_NO_FIT


def _parse_spec(text: str, r: int, s: int) -> garch_mod.GarchParams:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--spec must be comma-separated numbers, got {text!r}") from None
    spec = garch_mod.GarchSpec(r, s)
    if len(values) != spec.n_params:
        raise UsageError(f"{spec.label} needs {spec.n_params} values (c, alphas, betas), got {len(values)}")
    return garch_mod.GarchParams.from_vector(spec, values)


def simulated_prices(params: garch_mod.GarchParams, n: int, seed: int, base: float = 100.0) -> PriceSeries:
    """Price path ``base * exp(cumsum(returns))`` on consecutive business days."""
    r = garch_mod.simulate_garch(params, n, seed).values
    levels = base * np.exp(np.concatenate([[0.0], np.cumsum(r)]))
    days = np.busday_offset(np.datetime64(SIM_START, "D"), np.arange(n + 1), roll="forward")
    dates = tuple(d.astype(dt.date) for d in days)
    return PriceSeries(levels, dates)


def cmd_simulate(args) -> int:
    r, s = _order(args.order)
    _check_parsimony(r, s, "garch")
    if args.n < 1:
        raise UsageError("--n must be positive")
    params = _parse_spec(args.spec, r, s)
    prices = simulated_prices(params, args.n, args.seed)
    write_prices_csv(args.out, prices)
    if args.returns_out:
        rets = garch_mod.simulate_garch(params, args.n, args.seed).values
        write_rows_csv(args.returns_out, ["t", "return"], zip(range(1, args.n + 1), rets.tolist()))
    return EXIT_OK


def cmd_forecast(args) -> int:
    if args.horizon < 1:
        raise UsageError("--horizon must be a positive integer")
    r, s = _order(args.order)
    _check_parsimony(r, s, "garch")
    y = log_returns(read_prices_csv(args.input)).values
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = garch_mod.fit_garch(y, garch_mod.GarchSpec(r, s), demean=args.demean, **_opt_kwargs(args))
    fc = garch_mod.forecast_variance(fit, args.horizon)
    lines = ["h,sigma2,annualized_vol"]
    for h, v in zip(fc.horizons, fc.forecast_variance):
        lines.append(f"{h},{format_float(v)},{format_float(math.sqrt(TRADING_DAYS * v))}")
    if fc.unconditional_variance is not None:
        v = fc.unconditional_variance
        lines.append(f"inf,{format_float(v)},{format_float(math.sqrt(TRADING_DAYS * v))}")
    _emit("\n".join(lines) + "\n", args.out)
    if fc.diverging:
        print(_color("warning: persistence >= 1, forecasts do not converge", "33"), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volcast", description="GARCH volatility modelling toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run identification, estimation, selection and diagnostics")
    p.add_argument("input")
    p.add_argument("--out-dir", default="volcast-report")
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--max-lag", type=int, default=30, help="correlogram lags")
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry; the pipeline is deterministic")
    _add_test_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("fit", help="fit a single ARMA or GARCH model")
    p.add_argument("input")
    p.add_argument("--model", choices=("arma", "garch"), required=True)
    p.add_argument("--order", required=True, help="p,q for arma; r,s (alpha count, beta count) for garch")
    p.add_argument("--out", default=None)
    _add_test_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="write a simulated GARCH price path as date,close CSV")
    p.add_argument("--spec", required=True, help="c,alpha1[,alpha2][,beta1][,beta2]")
    p.add_argument("--order", default="1,1")
    p.add_argument("--n", type=int, default=1349, help="number of returns")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--returns-out", default=None, help="also write the raw returns as t,return CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("forecast", help="fit a GARCH model and forecast variance")
    p.add_argument("input")
    p.add_argument("--order", default="1,1")
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--out", default=None)
    p.add_argument("--demean", action="store_true")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_forecast)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"volcast {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (VolcastError, ValueError, OSError) as exc:
        print(f"volcast {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
