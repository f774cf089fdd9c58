"""GARCH volatility modelling: identification, estimation, diagnostics and forecasting."""
from volcast.arma import ArmaFit, ArmaSpec, fit_arma
from volcast.garch import (
    GarchFit,
    GarchParams,
    GarchSpec,
    fit_garch,
    forecast_variance,
    log_likelihood,
    model_select,
    simulate_garch,
    variance_recursion,
)
from volcast.series import PriceSeries, ReturnSeries, acf, log_returns, pacf, summary_stats
from volcast.stattests import (
    TestResult,
    adf_test,
    chi_square_sf,
    ks_normality_test,
    ljung_box_test,
    lm_arch_test,
)

__version__ = "0.1.0"
