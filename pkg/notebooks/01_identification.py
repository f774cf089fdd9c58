"""
Identification: from closing prices to the case for a volatility model.

Run from the repository root::

    python3 notebooks/01_identification.py [prices.csv]

Uses the bundled simulated fixture when no file is given.
"""
# %%
import sys
import warnings
from pathlib import Path

from volcast import arma, stattests
from volcast.io import read_prices_csv
from volcast.series import acf, log_returns, pacf, summary_stats

ROOT = Path(__file__).resolve().parent.parent
path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "data" / "garch11_seed42.csv"
prices = read_prices_csv(path)
returns = log_returns(prices)
print(f"{len(prices)} closes, {prices.dates[0]} to {prices.dates[-1]}")
print(summary_stats(returns))

# %% Levels should look like a unit root, returns should not.
for name, x in (("levels", prices.values), ("returns", returns.values)):
    res = stattests.adf_test(x)
    note = " (table edge)" if res.p_value_clamped else ""
    print(f"ADF {name:<8} stat={res.statistic:8.4f}  p={res.p_value:.3f}{note}")

# %% Correlograms of the returns, with the white-noise band.
r_acf, r_pacf = acf(returns, 10), pacf(returns, 10)
print(f"band +/- {r_acf.confidence_band:.4f}")
for k, a, p in zip(r_acf.lags, r_acf.coefficients, r_pacf.coefficients):
    print(f"lag {k:2d}  acf {a:+.4f}  pacf {p:+.4f}")

# %% Tentative mean models and the ARCH-effect gate on their residuals.
for p, q in ((0, 1), (1, 0), (1, 1)):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = arma.fit_arma(returns, arma.ArmaSpec(p, q))
    lm = stattests.lm_arch_test(fit.residuals, 12)
    print(f"{fit.spec.label}  AIC={fit.aic:10.2f}  LM={lm.statistic:8.2f}  p={lm.p_value:.2e}")
# Small p-values here mean the residual variance is predictable from its own past.
