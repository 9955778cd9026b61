"""Command-line entry point for batch runs that emit plot-ready CSV/JSON data.

Commands: stats, rolling, fit, compare, simulate. Exit codes follow a fixed
contract: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .calibrate import (
    FitError,
    compare_models,
    fit,
    fit_result_to_json,
    ranking_csv_text,
    write_beta_csv,
)
from .diagnostics import (
    ljung_box,
    rolling_acf,
    rolling_ljung_box,
    sample_acf,
    write_rolling_csv,
)
from .ingest import DataError, ReturnSeries, load_prices, log_returns, mean_adjust, summary_stats
from .models import KINDS, ModelSpec, theta_from_json
from .simulate import simulate, write_sim_csv
from .statespace import FilterNumericalError

__all__ = ["RunConfig", "main"]

DEFAULT_WINDOW = 80
DEFAULT_LAG = 1
DEFAULT_ALPHA = 0.01
MODEL_CHOICES = tuple(KINDS)

STATS_LAGS = (1, 5, 10, 15)
LB_MAX_LAG = 20


class UsageError(ValueError):
    """Bad argument combination detected after parsing."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; defaults mirror the rolling-window study parameters."""

    command: str
    input: Path | None = None
    window: int = DEFAULT_WINDOW
    lag: int = DEFAULT_LAG
    alpha: float = DEFAULT_ALPHA
    model: str | None = None
    ar_order: int = 1
    out: Path | None = None
    out_dir: Path | None = None
    seed: int | None = None
    length: int | None = None
    theta_json: str | None = None
    as_json: bool = False


class _Parser(argparse.ArgumentParser):
    # argparse uses exit code 2 for usage problems; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amhkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"amhkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="summary statistics and Ljung-Box table")
    p.add_argument("input", type=Path)
    p.add_argument("--json", action="store_true", dest="as_json",
                   help="emit JSON instead of the table view")

    p = sub.add_parser("rolling", help="rolling ACF and rolling Q-test p-values")
    p.add_argument("input", type=Path)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--lag", type=int, default=DEFAULT_LAG)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--out-dir", type=Path, default=None)

    p = sub.add_parser("fit", help="maximum-likelihood fit of one model")
    p.add_argument("input", type=Path)
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--ar-order", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=None)

    p = sub.add_parser("compare", help="fit all five models and rank by AIC")
    p.add_argument("input", type=Path)

    p = sub.add_parser("simulate", help="simulate a model at given parameters")
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--ar-order", type=int, default=1)
    p.add_argument("--theta", required=True, dest="theta_json",
                   help="JSON object with the model's parameter fields")
    p.add_argument("--length", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        window=getattr(args, "window", DEFAULT_WINDOW),
        lag=getattr(args, "lag", DEFAULT_LAG),
        alpha=getattr(args, "alpha", DEFAULT_ALPHA),
        model=getattr(args, "model", None),
        ar_order=getattr(args, "ar_order", 1),
        out=getattr(args, "out", None),
        out_dir=getattr(args, "out_dir", None),
        seed=getattr(args, "seed", None),
        length=getattr(args, "length", None),
        theta_json=getattr(args, "theta_json", None),
        as_json=getattr(args, "as_json", False),
    )


def _load_returns(path: Path) -> ReturnSeries:
    return log_returns(load_prices(path))


def _fmt(x, digits: int) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def cmd_stats(cfg: RunConfig) -> int:
    r = _load_returns(cfg.input)
    stats = summary_stats(r)
    n = stats.n
    lags = [l for l in STATS_LAGS if l < n]
    acf = {l: sample_acf(r, l).rho for l in lags}
    lb = {l: ljung_box(r, l) for l in lags}
    upto = [ljung_box(r, l).p_value for l in range(1, min(LB_MAX_LAG, n - 1) + 1)]
    reject_1 = any(p < 0.01 for p in upto)
    reject_5 = any(p < 0.05 for p in upto)
    if cfg.as_json:
        payload = {
            "n": n,
            "mean": stats.mean,
            "median": stats.median,
            "std": stats.std,
            "skewness": stats.skewness,
            "kurtosis": stats.kurtosis,
            "acf": {str(l): acf[l] for l in lags},
            "ljung_box": {str(l): {"q": lb[l].q, "p_value": lb[l].p_value} for l in lags},
            "lb_up_to_20": {"reject_1pct": reject_1, "reject_5pct": reject_5},
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"n         {n}")
    print(f"mean      {stats.mean:.5f}")
    print(f"median    {stats.median:.5f}")
    print(f"std       {stats.std:.5f}")
    print(f"skewness  {_fmt(stats.skewness, 5)}")
    print(f"kurtosis  {_fmt(stats.kurtosis, 5)}")
    for l in lags:
        print(f"rho_{l:<3d}   {acf[l]:.4f}")
    for l in lags:
        print(f"Q({l})      {lb[l].q:.4f}  p-value {lb[l].p_value:.4f}")
    print(f"Q-test up to lag {LB_MAX_LAG}: "
          f"H0 {'rejected' if reject_1 else 'not rejected'} at 1%, "
          f"{'rejected' if reject_5 else 'not rejected'} at 5%")
    return 0


def cmd_rolling(cfg: RunConfig) -> int:
    r = _load_returns(cfg.input)
    n = len(r)
    if cfg.window < 2 or cfg.window > n:
        raise UsageError(f"window must satisfy 2 <= w <= {n}, got {cfg.window}")
    if cfg.lag < 1 or cfg.lag >= cfg.window:
        raise UsageError(f"lag must satisfy 1 <= lag < window, got {cfg.lag}")
    if not 0 < cfg.alpha < 1:
        raise UsageError(f"alpha must lie in (0, 1), got {cfg.alpha}")
    out_dir = cfg.out_dir if cfg.out_dir is not None else cfg.input.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.input.stem
    acf_series = rolling_acf(r, cfg.window, cfg.lag, cfg.alpha)
    lb_series = rolling_ljung_box(r, cfg.window, cfg.lag)
    acf_path = out_dir / f"{stem}_rolling_acf.csv"
    lb_path = out_dir / f"{stem}_rolling_lb.csv"
    write_rolling_csv(acf_series, acf_path)
    write_rolling_csv(lb_series, lb_path)
    print(acf_path)
    print(lb_path)
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    if cfg.ar_order < 1:
        raise UsageError(f"--ar-order must be >= 1, got {cfg.ar_order}")
    r = mean_adjust(_load_returns(cfg.input))
    spec = ModelSpec(kind=cfg.model, ar_order=cfg.ar_order)
    result = fit(spec, r)
    out_dir = cfg.out_dir if cfg.out_dir is not None else cfg.input.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    beta_path = out_dir / f"{cfg.input.stem}_beta.csv"
    write_beta_csv(result, beta_path)
    print(json.dumps(fit_result_to_json(result), indent=2))
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    r = mean_adjust(_load_returns(cfg.input))
    specs = [ModelSpec(kind=k) for k in MODEL_CHOICES]
    rows = compare_models(r, specs)
    sys.stdout.write(ranking_csv_text(rows))
    if all(row.error is not None for row in rows):
        raise FitError("every model failed to fit")
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.ar_order < 1:
        raise UsageError(f"--ar-order must be >= 1, got {cfg.ar_order}")
    spec = ModelSpec(kind=cfg.model, ar_order=cfg.ar_order)
    try:
        payload = json.loads(cfg.theta_json)
        if not isinstance(payload, dict):
            raise ValueError("theta must be a JSON object")
        theta = theta_from_json(spec, payload)
    except (json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"bad --theta: {exc}") from exc
    if cfg.length is None or cfg.length < 2:
        raise UsageError("--length must be at least 2")
    sim = simulate(spec, theta, cfg.length, cfg.seed)
    write_sim_csv(sim, cfg.out)
    print(cfg.out)
    return 0


_COMMANDS = {
    "stats": cmd_stats,
    "rolling": cmd_rolling,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = _config_from_args(args)
    try:
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"amhkit: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"amhkit: data error: {exc}", file=sys.stderr)
        return 2
    except (FitError, FilterNumericalError) as exc:
        print(f"amhkit: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        # library precondition violations surface as data errors
        print(f"amhkit: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
