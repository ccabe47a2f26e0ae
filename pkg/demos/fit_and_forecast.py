"""Application workflow on the bundled 73-point synthetic series.

Chooses an order by AIC, fits it, corrects the estimates with the
parametric bootstrap, checks the residuals and scores six-step forecasts
against the last six observations.

Run from the repository root::

    python3 demos/fit_and_forecast.py
"""

from pathlib import Path

import numpy as np

from betarma import (
    RngStream,
    accuracy,
    asymptotic_ci,
    ci_boot_se,
    fit,
    forecast,
    mean_recursion,
    run_bootstrap,
    sample_acf,
    select_order,
    standardized_residuals,
)
from betarma.cli import ingest_csv

DATA = Path(__file__).resolve().parent.parent / "data" / "sample_73.csv"
H = 6


def main():
    y = ingest_csv(DATA)
    train = y.values[:-H]
    print(f"{y.n} observations, fitting on the first {train.size}")

    search = select_order("logit", train, p_max=3, q_max=3)
    order = search.best
    print(f"lowest AIC: p={order.p}, q={order.q} (AIC {search.best_fit.aic:.3f})")

    rep = fit(order, "logit", train)
    boot = run_bootstrap(order, "logit", train, rep, B=500, rng=RngStream(1))
    asym, bse = asymptotic_ci(rep), ci_boot_se(rep, boot)
    print(f"\n{'param':>10} {'mle':>9} {'corrected':>10} {'asymptotic CI':>22} {'bootstrap CI':>22}")
    for name, est, cor, a, b in zip(order.coord_names(), rep.estimate.to_array(),
                                    boot.corrected.to_array(), asym, bse):
        print(f"{name:>10} {est:9.4f} {cor:10.4f} [{a.lower:9.4f}, {a.upper:9.4f}] "
              f"[{b.lower:9.4f}, {b.upper:9.4f}]")

    path = mean_recursion(order, rep.estimate, "logit", train)
    z = standardized_residuals(rep, path)
    band = 2 / np.sqrt(z.size)
    print(f"\nstandardized residuals: {np.mean(np.abs(z) > 3):.1%} outside (-3, 3), "
          f"{np.sum(np.abs(sample_acf(z, 10)) > band)} of 10 ACF lags outside +-{band:.3f}")

    fc = forecast(order, rep.estimate, "logit", train, path, H)
    mse, mape, mase = accuracy(y.values[-H:], fc.mu_hat)
    print("\nh  observed  forecast")
    for h, (obs, pred) in enumerate(zip(y.values[-H:], fc.mu_hat), start=1):
        print(f"{h}  {obs:8.4f}  {pred:8.4f}")
    print(f"MSE {mse:.5f}  MAPE {mape:.4f}  MASE {mase:.4f}")


if __name__ == "__main__":
    main()
