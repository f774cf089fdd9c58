"""
Estimation: fit the four candidate GARCH models and compare them.

    python3 notebooks/02_garch_estimation.py [prices.csv]
"""
# %%
import sys
from pathlib import Path

from volcast.garch import CANDIDATE_SPECS, comparison_table, fit_garch, model_select
from volcast.io import read_prices_csv
from volcast.series import log_returns

ROOT = Path(__file__).resolve().parent.parent
path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "data" / "garch11_seed42.csv"
y = log_returns(read_prices_csv(path)).values

# %% Each fit reports estimates, standard errors, t-values and normal p-values.
fits = [fit_garch(y, spec) for spec in CANDIDATE_SPECS]
for fit in fits:
    print(fit.label)
    for row in fit.estimate_table():
        print("  {parameter:<7} {estimate:11.4e}  se {std_error:10.3e}  t {t_value:8.3f}  p {p_value:.5f}".format(**row))
    flagged = [n for n, b in zip(fit.spec.param_names, fit.boundary) if b]
    if flagged:
        print("  at the zero boundary:", ", ".join(flagged))

# %% Selection by AIC, log-likelihood as the tie-breaker.
for row in comparison_table(fits):
    print(f"{row['model']:<11} AIC {row['aic']:12.3f}  LL {row['loglik']:10.3f}  k {row['k']}")
best = model_select(fits)
print("selected:", best.label, " persistence", round(best.params.persistence, 4))
