"""Maximum-likelihood calibration, AIC ranking, and finite-difference standard errors.

The optimizer is a plain Nelder-Mead simplex (reflect 1, expand 2, contract
0.5, shrink 0.5) run in the unconstrained parameter space, stopping when the
simplex has collapsed to within 1e-6 (euclidean) in natural parameter space
or after `max_iter` iterations. Probes that fail numerically score a large
penalty so the simplex retreats instead of aborting. Set AMH_LOG=debug for
per-iteration tracing on stderr.
"""

from __future__ import annotations

import math
import os
import sys
import warnings
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._util import atomic_write_text
from .ingest import ReturnSeries
from .kernels import fast_loglik, supports_fast_path
from .models import (
    ModelSpec,
    Theta,
    build_model,
    default_init,
    default_theta,
    n_params,
    theta_to_json,
    theta_to_unconstrained,
    theta_to_vector,
    unconstrained_to_theta,
    validate_theta,
    vector_to_theta,
)
from .statespace import FilterNumericalError, rts_smooth, run_filter

__all__ = [
    "FitError",
    "FitResult",
    "CompareRow",
    "fit",
    "aic",
    "standard_errors",
    "finite_difference_hessian",
    "se_from_hessian",
    "compare_models",
    "fit_result_to_json",
    "ranking_csv_text",
    "write_beta_csv",
]

PENALTY = 1e12
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 2000


class FitError(RuntimeError):
    """Calibration could not find any numerically valid parameter point."""


@dataclass
class FitResult:
    spec: ModelSpec
    theta: Theta
    log_lf: float
    aic: float
    std_errors: np.ndarray
    smoothed_dates: tuple[date, ...]
    smoothed_beta: np.ndarray
    iterations: int
    converged: bool
    floor_hits: int


@dataclass
class CompareRow:
    spec: ModelSpec
    k: int
    log_lf: float | None
    aic: float | None
    preferred: bool
    error: str | None
    result: FitResult | None


def aic(k: int, log_lf: float) -> float:
    """Akaike information criterion 2k - 2 lnL (lower is preferred)."""
    return 2.0 * k - 2.0 * log_lf


def _trace_enabled() -> bool:
    return os.environ.get("AMH_LOG", "").lower() == "debug"


def _make_objective(spec: ModelSpec, data: ReturnSeries) -> Callable[[np.ndarray], float]:
    """Penalized negative log-likelihood over the unconstrained space."""
    y = data.values
    use_fast = supports_fast_path(spec)
    h0 = None
    if use_fast and spec.kind != "tvar":
        h0 = float(np.var(y, ddof=1))
    init = default_init(spec, y)

    def neg_ll(v: np.ndarray) -> float:
        try:
            theta = unconstrained_to_theta(spec, v)
            if use_fast:
                ll, _ = fast_loglik(spec, theta, y, h0=h0)
            else:
                model = build_model(spec, theta)
                ll = run_filter(model, y, init).log_lik
        except (FilterNumericalError, ValueError, FloatingPointError):
            return PENALTY
        if not math.isfinite(ll):
            return PENALTY
        return -ll

    return neg_ll


def _nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    natural_of: Callable[[np.ndarray], np.ndarray],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial_step: float = 0.05,
    trace: bool = False,
) -> tuple[np.ndarray, float, int, bool]:
    """Minimize f from x0; converged when the simplex collapses in natural space."""
    p = len(x0)
    verts = np.empty((p + 1, p))
    verts[0] = x0
    for i in range(p):
        verts[i + 1] = x0
        verts[i + 1, i] += initial_step
    fvals = np.array([f(v) for v in verts])

    iterations = 0
    converged = False
    while True:
        order = np.argsort(fvals, kind="stable")
        verts = verts[order]
        fvals = fvals[order]

        nat = np.array([natural_of(v) for v in verts])
        spread = float(np.max(np.linalg.norm(nat[1:] - nat[0], axis=1)))
        if trace:
            print(
                f"nm iter={iterations} best={fvals[0]:.10g} spread={spread:.3e}",
                file=sys.stderr,
            )
        if spread <= tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1

        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]
        xr = centroid + (centroid - worst)
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = f(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = f(xc)
                if fc <= fr:
                    verts[-1], fvals[-1] = xc, fc
                else:
                    verts, fvals = _shrink(f, verts, fvals)
            else:
                xc = centroid - 0.5 * (centroid - worst)
                fc = f(xc)
                if fc < fvals[-1]:
                    verts[-1], fvals[-1] = xc, fc
                else:
                    verts, fvals = _shrink(f, verts, fvals)

    best = int(np.argmin(fvals))
    return verts[best].copy(), float(fvals[best]), iterations, converged


def _shrink(f, verts, fvals):
    for i in range(1, len(verts)):
        verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
        fvals[i] = f(verts[i])
    return verts, fvals


def fit(
    spec: ModelSpec,
    data: ReturnSeries,
    init: Theta | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FitResult:
    """Maximize the prediction-error log-likelihood of `spec` over `data`.

    `data` must be mean-adjusted with at least 30 observations. `init`
    overrides the standard starting parameters. The returned log_lf/AIC are
    evaluated at the optimum with the reference filter; the smoothed beta path
    comes from the fixed-interval smoother at the optimum.
    """
    if not isinstance(data, ReturnSeries):
        raise TypeError("data must be a ReturnSeries")
    if not data.mean_adjusted:
        raise ValueError("data must be mean-adjusted before calibration")
    if len(data) < 30:
        raise ValueError(f"need at least 30 observations, got {len(data)}")
    theta0 = default_theta(spec, data) if init is None else init
    validate_theta(spec, theta0)

    neg_ll = _make_objective(spec, data)
    v0 = theta_to_unconstrained(spec, theta0)

    def natural_of(v: np.ndarray) -> np.ndarray:
        return theta_to_vector(spec, unconstrained_to_theta(spec, v))

    v_star, f_star, iterations, converged = _nelder_mead(
        neg_ll, v0, natural_of, tol=tol, max_iter=max_iter, trace=_trace_enabled()
    )
    if f_star >= PENALTY:
        raise FitError(f"no numerically valid parameters found for {spec.kind}")

    theta_star = unconstrained_to_theta(spec, v_star)
    model = build_model(spec, theta_star)
    fo = run_filter(model, data.values, default_init(spec, data.values))
    smooth = rts_smooth(fo, model.system)
    ses = standard_errors(spec, theta_star, data)
    k = n_params(spec)
    return FitResult(
        spec=spec,
        theta=theta_star,
        log_lf=fo.log_lik,
        aic=aic(k, fo.log_lik),
        std_errors=ses,
        smoothed_dates=tuple(data.dates[fo.start_index :]),
        smoothed_beta=smooth.x_smooth[:, model.beta_index].copy(),
        iterations=iterations,
        converged=converged,
        floor_hits=fo.floor_hits,
    )


def finite_difference_hessian(
    f: Callable[[np.ndarray], float], x: np.ndarray, steps: np.ndarray
) -> np.ndarray:
    """Central-difference Hessian; symmetric by construction."""
    x = np.asarray(x, dtype=float)
    p = len(x)
    H = np.empty((p, p))
    f0 = f(x)

    def at(**offsets) -> float:
        z = x.copy()
        for idx, delta in offsets.items():
            z[int(idx[1:])] += delta
        return f(z)

    for i in range(p):
        hi = steps[i]
        H[i, i] = (at(**{f"i{i}": hi}) - 2.0 * f0 + at(**{f"i{i}": -hi})) / hi**2
        for j in range(i + 1, p):
            hj = steps[j]
            fpp = at(**{f"i{i}": hi, f"i{j}": hj})
            fpm = at(**{f"i{i}": hi, f"i{j}": -hj})
            fmp = at(**{f"i{i}": -hi, f"i{j}": hj})
            fmm = at(**{f"i{i}": -hi, f"i{j}": -hj})
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj)
    return H


def se_from_hessian(H: np.ndarray) -> np.ndarray:
    """Sqrt of inverse-Hessian diagonal; NaN marks parameters without a valid SE."""
    p = H.shape[0]
    out = np.full(p, np.nan)
    if not np.all(np.isfinite(H)):
        warnings.warn("Hessian contains non-finite entries; standard errors undefined")
        return out
    try:
        Hinv = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        warnings.warn("singular Hessian; standard errors undefined")
        return out
    diag = np.diag(Hinv)
    bad = ~(diag > 0)
    if np.any(bad):
        warnings.warn("Hessian not positive definite; some standard errors undefined")
    out[~bad] = np.sqrt(diag[~bad])
    return out


def standard_errors(spec: ModelSpec, theta: Theta, data: ReturnSeries) -> np.ndarray:
    """Asymptotic SEs from the curvature of -lnL at `theta` in natural space.

    Steps are max(1e-4, 1e-4 |theta_i|); probes outside the constraint set
    score the penalty, which surfaces as NaN markers for the affected
    parameters rather than an exception.
    """
    y = data.values if isinstance(data, ReturnSeries) else np.asarray(data, float)
    use_fast = supports_fast_path(spec)
    h0 = float(np.var(y, ddof=1)) if spec.kind != "tvar" else None
    init = default_init(spec, y)

    def neg_ll_natural(vec: np.ndarray) -> float:
        try:
            th = vector_to_theta(spec, vec)
            validate_theta(spec, th)
            if use_fast:
                ll, _ = fast_loglik(spec, th, y, h0=h0)
            else:
                ll = run_filter(build_model(spec, th), y, init).log_lik
        except (FilterNumericalError, ValueError, FloatingPointError):
            return PENALTY
        return -ll if math.isfinite(ll) else PENALTY

    x = theta_to_vector(spec, theta)
    steps = np.maximum(1e-4, 1e-4 * np.abs(x))
    H = finite_difference_hessian(neg_ll_natural, x, steps)
    return se_from_hessian(H)


def compare_models(data: ReturnSeries, specs: Sequence[ModelSpec]) -> list[CompareRow]:
    """Fit every spec from the standard initialization and rank by AIC.

    Individual failures become rows with an error message; the lowest-AIC
    successful fit is marked preferred. Rows come back sorted ascending by
    AIC with failures last.
    """
    if len(specs) < 2:
        raise ValueError("need at least two specs to compare")
    rows: list[CompareRow] = []
    for spec in specs:
        k = n_params(spec)
        try:
            result = fit(spec, data)
        except (FitError, FilterNumericalError, ValueError) as exc:
            rows.append(CompareRow(spec=spec, k=k, log_lf=None, aic=None,
                                   preferred=False, error=str(exc), result=None))
            continue
        rows.append(CompareRow(spec=spec, k=k, log_lf=result.log_lf, aic=result.aic,
                               preferred=False, error=None, result=result))
    rows.sort(key=lambda r: (r.aic is None, r.aic if r.aic is not None else 0.0))
    for row in rows:
        if row.aic is not None:
            row.preferred = True
            break
    return rows


def _spec_label(spec: ModelSpec) -> str:
    if spec.kind == "tvar" and spec.ar_order != 1:
        return f"tvar{spec.ar_order}"
    return spec.kind


def ranking_csv_text(rows: Sequence[CompareRow]) -> str:
    lines = ["model,k,log_lf,aic,preferred,error"]
    for r in rows:
        ll = "" if r.log_lf is None else repr(r.log_lf)
        a = "" if r.aic is None else repr(r.aic)
        err = "" if r.error is None else r.error.replace(",", ";").replace("\n", " ")
        lines.append(f"{_spec_label(r.spec)},{r.k},{ll},{a},{str(r.preferred).lower()},{err}")
    return "\n".join(lines) + "\n"


def fit_result_to_json(fr: FitResult) -> dict:
    ses = [None if not math.isfinite(s) else float(s) for s in fr.std_errors]
    return {
        "spec": {"kind": fr.spec.kind, "ar_order": fr.spec.ar_order},
        "theta": theta_to_json(fr.theta),
        "log_lf": fr.log_lf,
        "aic": fr.aic,
        "std_errors": ses,
        "converged": fr.converged,
        "iterations": fr.iterations,
        "floor_hits": fr.floor_hits,
        "smoothed_beta": [
            {"date": d.isoformat(), "value": float(v)}
            for d, v in zip(fr.smoothed_dates, fr.smoothed_beta)
        ],
    }


def write_beta_csv(fr: FitResult, path: str | Path) -> None:
    """Smoothed first-lag coefficient path as `date,beta`."""
    lines = ["date,beta"]
    for d, v in zip(fr.smoothed_dates, fr.smoothed_beta):
        lines.append(f"{d.isoformat()},{float(v)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
