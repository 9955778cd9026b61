#!/usr/bin/env python3
"""Full efficiency report for one market: summary stats, rolling tests,
model ranking, and the smoothed efficiency path of the best-fit model.

Usage:
    python3 scripts/market_report.py prices.csv --out-dir report/

Writes into the output directory:
    stats.json              summary statistics and Ljung-Box table
    rolling_acf.csv         rolling lag-1 autocorrelation with bounds
    rolling_lb.csv          rolling Q-test p-values
    ranking.csv             AIC ranking of the five models
    best_fit.json           full fit result of the preferred model
    beta_smoothed.csv       smoothed first-lag coefficient path
    states_filtered.csv     filtered states of the preferred model
"""

import argparse
import json
from pathlib import Path

from amhkit.calibrate import (
    compare_models,
    fit_result_to_json,
    ranking_csv_text,
    write_beta_csv,
)
from amhkit.diagnostics import (
    ljung_box,
    rolling_acf,
    rolling_ljung_box,
    sample_acf,
    write_rolling_csv,
)
from amhkit.ingest import load_prices, log_returns, mean_adjust, summary_stats
from amhkit.models import KINDS, ModelSpec, build_model, default_init
from amhkit.statespace import run_filter, write_states_csv
from amhkit._util import atomic_write_text


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", type=Path, help="date,close CSV of monthly prices")
    parser.add_argument("--out-dir", type=Path, default=Path("report"))
    parser.add_argument("--window", type=int, default=80)
    parser.add_argument("--alpha", type=float, default=0.01)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    returns = log_returns(load_prices(args.input))
    stats = summary_stats(returns)
    lags = [l for l in (1, 5, 10, 15) if l < stats.n]
    payload = {
        "n": stats.n,
        "mean": stats.mean,
        "median": stats.median,
        "std": stats.std,
        "skewness": stats.skewness,
        "kurtosis": stats.kurtosis,
        "acf": {str(l): sample_acf(returns, l).rho for l in lags},
        "ljung_box": {
            str(l): {"q": ljung_box(returns, l).q, "p_value": ljung_box(returns, l).p_value}
            for l in lags
        },
    }
    atomic_write_text(args.out_dir / "stats.json", json.dumps(payload, indent=2) + "\n")

    write_rolling_csv(rolling_acf(returns, args.window, 1, args.alpha),
                      args.out_dir / "rolling_acf.csv")
    write_rolling_csv(rolling_ljung_box(returns, args.window, 1),
                      args.out_dir / "rolling_lb.csv")

    adjusted = mean_adjust(returns)
    rows = compare_models(adjusted, [ModelSpec(k) for k in KINDS])
    atomic_write_text(args.out_dir / "ranking.csv", ranking_csv_text(rows))

    best = next(row for row in rows if row.preferred)
    print(f"preferred model: {best.spec.kind}  (AIC {best.aic:.2f}, lnL {best.log_lf:.4f})")
    result = best.result
    atomic_write_text(args.out_dir / "best_fit.json",
                      json.dumps(fit_result_to_json(result), indent=2) + "\n")
    write_beta_csv(result, args.out_dir / "beta_smoothed.csv")

    model = build_model(best.spec, result.theta)
    fo = run_filter(model, adjusted.values, default_init(best.spec, adjusted.values))
    write_states_csv(fo, args.out_dir / "states_filtered.csv", dates=adjusted.dates)
    print(f"wrote report to {args.out_dir}/")


if __name__ == "__main__":
    main()
