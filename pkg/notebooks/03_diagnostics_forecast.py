"""
Diagnostics and forecasting for the selected model.

    python3 notebooks/03_diagnostics_forecast.py [prices.csv]
"""
# %%
import math
import sys
from pathlib import Path

from volcast import stattests
from volcast.garch import CANDIDATE_SPECS, fit_garch, forecast_variance, model_select
from volcast.io import read_prices_csv
from volcast.series import log_returns

ROOT = Path(__file__).resolve().parent.parent
path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "data" / "garch11_seed42.csv"
y = log_returns(read_prices_csv(path)).values
best = model_select([fit_garch(y, spec) for spec in CANDIDATE_SPECS])
z = best.std_residuals
print("model:", best.label)

# %% Standardized residuals should be free of ARCH effects, normal and uncorrelated.
checks = (
    stattests.lm_arch_test(z, 12),
    stattests.ks_normality_test(z),
    stattests.ljung_box_test(z, 1),
)
for res in checks:
    verdict = "reject" if res.reject(0.05) else "ok"
    print(f"{res.test_name:<12} stat={res.statistic:9.4f}  p={res.p_value:.4f}  {verdict}")

# %% Variance forecasts decay geometrically toward the long-run level.
fc = forecast_variance(best, 60)
for h in (1, 5, 10, 20, 40, 60):
    v = fc.forecast_variance[h - 1]
    print(f"h={h:3d}  sigma2={v:.4e}  annualized vol={math.sqrt(252 * v):.3%}")
if fc.unconditional_variance is not None:
    print(f"long run   sigma2={fc.unconditional_variance:.4e}")
