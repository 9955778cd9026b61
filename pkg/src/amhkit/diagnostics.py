"""Serial-correlation diagnostics: sample ACF, Ljung-Box Q-test, rolling windows.

Rolling variants re-estimate the mean inside every window, treating each
sub-sample as an independent draw. Degenerate (zero-variance) windows yield
NaN entries instead of aborting the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
from scipy import special

from ._util import atomic_write_text
from .ingest import ReturnSeries

__all__ = [
    "DegenerateWindowError",
    "AcfResult",
    "LjungBoxResult",
    "RollingSeries",
    "sample_acf",
    "ljung_box",
    "chi_square_sf",
    "acf_confidence_bound",
    "rolling_acf",
    "rolling_ljung_box",
    "write_rolling_csv",
]


class DegenerateWindowError(ValueError):
    """Zero-variance sample: autocorrelation is undefined."""


@dataclass(frozen=True)
class AcfResult:
    lag: int
    rho: float


@dataclass(frozen=True)
class LjungBoxResult:
    lag: int
    q: float
    p_value: float


@dataclass(frozen=True)
class RollingSeries:
    """Per-window statistic aligned to window end dates.

    `values` has one entry per window (N - w + 1 total); NaN marks a window
    where the statistic is undefined. `lower`/`upper` are the symmetric
    confidence bounds for ACF series and None for p-value series.
    """

    window: int
    end_dates: tuple[date, ...]
    values: np.ndarray
    lower: float | None = None
    upper: float | None = None


def _acf_values(y: np.ndarray, lag: int) -> float:
    ybar = y.mean()
    dev = y - ybar
    denom = float(np.sum(dev**2))
    if denom == 0.0:
        raise DegenerateWindowError("zero-variance window")
    if lag == 0:
        return 1.0
    num = float(np.sum(dev[lag:] * dev[:-lag]))
    return num / denom


def sample_acf(r: ReturnSeries, lag: int) -> AcfResult:
    """Sample autocorrelation at `lag` with the full-sample centered denominator."""
    n = len(r)
    if not 0 <= lag < n:
        raise ValueError(f"lag must satisfy 0 <= lag < {n}, got {lag}")
    return AcfResult(lag=lag, rho=_acf_values(r.values, lag))


def _ljung_box_values(y: np.ndarray, lag: int) -> tuple[float, float]:
    n = len(y)
    q = 0.0
    for k in range(1, lag + 1):
        rho_k = _acf_values(y, k)
        q += rho_k**2 / (n - k)
    q *= n * (n + 2)
    return q, chi_square_sf(q, lag)


def ljung_box(r: ReturnSeries, lag: int) -> LjungBoxResult:
    """Joint test that the first `lag` autocorrelations are zero."""
    n = len(r)
    if not 1 <= lag < n:
        raise ValueError(f"lag must satisfy 1 <= lag < {n}, got {lag}")
    q, p = _ljung_box_values(r.values, lag)
    return LjungBoxResult(lag=lag, q=q, p_value=p)


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail chi-square probability via the regularized incomplete gamma."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if df < 1:
        raise ValueError("df must be a positive integer")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def acf_confidence_bound(w: int, alpha: float) -> float:
    """Two-sided null bound z_{1-alpha/2}/sqrt(w) for a sample ACF over w points."""
    if w < 2:
        raise ValueError("window must be at least 2")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = float(special.ndtri(1.0 - alpha / 2.0))
    return z / math.sqrt(w)


def _check_window(n: int, w: int, lag: int) -> None:
    if w < 2 or w > n:
        raise ValueError(f"window must satisfy 2 <= w <= {n}, got {w}")
    if lag >= w:
        raise ValueError(f"lag must be less than window, got lag={lag} w={w}")


def rolling_acf(r: ReturnSeries, w: int, lag: int, alpha: float) -> RollingSeries:
    """Sample ACF over every length-w sub-sample, with +/- confidence bounds."""
    n = len(r)
    _check_window(n, w, lag)
    bound = acf_confidence_bound(w, alpha)
    values = np.empty(n - w + 1)
    for i in range(n - w + 1):
        window = r.values[i : i + w]
        try:
            values[i] = _acf_values(window, lag)
        except DegenerateWindowError:
            values[i] = np.nan
    return RollingSeries(
        window=w,
        end_dates=r.dates[w - 1 :],
        values=values,
        lower=-bound,
        upper=bound,
    )


def rolling_ljung_box(r: ReturnSeries, w: int, lag: int) -> RollingSeries:
    """Ljung-Box p-value over every length-w sub-sample."""
    n = len(r)
    _check_window(n, w, lag)
    values = np.empty(n - w + 1)
    for i in range(n - w + 1):
        window = r.values[i : i + w]
        try:
            values[i] = _ljung_box_values(window, lag)[1]
        except DegenerateWindowError:
            values[i] = np.nan
    return RollingSeries(window=w, end_dates=r.dates[w - 1 :], values=values)


def write_rolling_csv(series: RollingSeries, path: str | Path) -> None:
    """Write `end_date,stat,lower,upper` rows; NaN stats and absent bounds are empty."""
    lines = ["end_date,stat,lower,upper"]
    lo = "" if series.lower is None else repr(float(series.lower))
    hi = "" if series.upper is None else repr(float(series.upper))
    for d, v in zip(series.end_dates, series.values):
        stat = "" if np.isnan(v) else repr(float(v))
        lines.append(f"{d.isoformat()},{stat},{lo},{hi}")
    atomic_write_text(path, "\n".join(lines) + "\n")
