"""Price ingestion, log returns, and summary statistics of monthly return series."""

from __future__ import annotations

import calendar
import csv
import math
import warnings
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "PriceSeries",
    "ReturnSeries",
    "SummaryStats",
    "load_prices",
    "log_returns",
    "mean_adjust",
    "summary_stats",
    "month_ends",
]

ZERO_MEAN_TOL = 1e-12


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _frozen(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """Monthly closing prices with strictly increasing dates."""

    dates: tuple[date, ...]
    closes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "closes", _frozen(self.closes))
        if len(self.dates) != len(self.closes):
            raise DataError("dates and closes must have equal length")
        if len(self.closes) < 2:
            raise DataError("need at least two prices")
        for i in range(1, len(self.dates)):
            if self.dates[i] <= self.dates[i - 1]:
                raise DataError("non-monotone dates")
        if np.any(self.closes <= 0):
            row = int(np.argmax(self.closes <= 0)) + 2  # +1 header, +1 one-based
            raise DataError(f"non-positive price at row {row}")

    def __len__(self) -> int:
        return len(self.closes)


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns; each value is dated at the later of its two prices."""

    dates: tuple[date, ...]
    values: np.ndarray
    mean_adjusted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if len(self.dates) != len(self.values):
            raise DataError("dates and values must have equal length")
        if self.mean_adjusted and len(self.values) > 0:
            if abs(float(np.mean(self.values))) > ZERO_MEAN_TOL:
                raise DataError("mean_adjusted series must have zero sample mean")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SummaryStats:
    """Sample moments; skewness/kurtosis are None when the series is degenerate.

    std uses divisor n-1; skewness is m3/m2^(3/2) and kurtosis is raw m4/m2^2
    (normal = 3), both on biased central moments.
    """

    n: int
    mean: float
    median: float
    std: float
    skewness: float | None
    kurtosis: float | None


def load_prices(path: str | Path) -> PriceSeries:
    """Parse a `date,close` CSV of monthly closing prices.

    Dates must be ISO-8601 and strictly increasing, closes positive decimals.
    Raises DataError with the offending row number on bad content.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["date", "close"]:
            raise DataError(f"{path}: expected header 'date,close', got {','.join(header)!r}")
        dates: list[date] = []
        closes: list[float] = []
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataError(f"{path}: malformed row {rownum}")
            try:
                d = date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataError(f"{path}: bad date at row {rownum}: {row[0]!r}") from None
            try:
                c = float(row[1])
            except ValueError:
                raise DataError(f"{path}: bad close at row {rownum}: {row[1]!r}") from None
            if not math.isfinite(c) or c <= 0:
                raise DataError(f"non-positive price at row {rownum}")
            if dates and d <= dates[-1]:
                raise DataError("non-monotone dates")
            dates.append(d)
            closes.append(c)
    if len(closes) < 2:
        raise DataError(f"{path}: need at least two prices, got {len(closes)}")
    _warn_irregular_spacing(dates)
    return PriceSeries(dates=tuple(dates), closes=np.array(closes))


def _warn_irregular_spacing(dates: list[date]) -> None:
    # Monthly spacing is advisory only; ordering is all the math needs.
    gaps = [(dates[i] - dates[i - 1]).days for i in range(1, len(dates))]
    if any(g < 20 or g > 40 for g in gaps):
        warnings.warn("price dates are not regular monthly intervals", stacklevel=3)


def log_returns(p: PriceSeries) -> ReturnSeries:
    """Continuously compounded returns ln(S_t) - ln(S_{t-1})."""
    values = np.diff(np.log(p.closes))
    return ReturnSeries(dates=p.dates[1:], values=values, mean_adjusted=False)


def mean_adjust(r: ReturnSeries) -> ReturnSeries:
    """Subtract the sample mean so the intercept can be dropped from AR models."""
    if r.mean_adjusted:
        raise DataError("series is already mean-adjusted")
    return replace(r, values=r.values - r.values.mean(), mean_adjusted=True)


def summary_stats(r: ReturnSeries) -> SummaryStats:
    """Sample moments of a return series (n >= 2)."""
    y = r.values
    n = len(y)
    if n < 2:
        raise DataError("need at least two returns for summary statistics")
    mean = float(y.mean())
    dev = y - mean
    m2 = float(np.mean(dev**2))
    std = float(np.sqrt(np.sum(dev**2) / (n - 1)))
    if m2 == 0.0:
        skew: float | None = None
        kurt: float | None = None
    else:
        # standardize first so extreme scales cannot underflow the ratios
        z = dev / math.sqrt(m2)
        skew = float(np.mean(z**3))
        kurt = float(np.mean(z**4))
        if not (math.isfinite(skew) and math.isfinite(kurt)):
            skew = kurt = None
    return SummaryStats(
        n=n,
        mean=mean,
        median=float(np.median(y)),
        std=std,
        skewness=skew,
        kurtosis=kurt,
    )


def month_ends(n: int, start_year: int = 1995, start_month: int = 1) -> tuple[date, ...]:
    """n consecutive month-end dates, by default from 1995-01-31."""
    out = []
    year, month = start_year, start_month
    for _ in range(n):
        out.append(date(year, month, calendar.monthrange(year, month)[1]))
        year, month = (year + 1, 1) if month == 12 else (year, month + 1)
    return tuple(out)
