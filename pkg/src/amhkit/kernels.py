"""JIT-compiled likelihood loops for the calibration hot path.

These replicate `statespace.run_filter` + `log_likelihood` arithmetic for the
two-state conditional-variance models and the scalar random-walk AR(1), with
the default prior (coefficients 0, unit covariance, h at `h0`). Equivalence to
the generic filter is asserted in the test suite; everything user-facing still
goes through `statespace`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .models import (
    H_FLOOR,
    AgarchTheta,
    GarchMTheta,
    GarchTheta,
    ModelSpec,
    Theta,
    TgarchTheta,
    TvarTheta,
)
from .statespace import LOG_2PI, FilterNumericalError

__all__ = ["supports_fast_path", "fast_loglik"]

_GARCH = 0
_GARCHM = 1
_TGARCH = 2
_AGARCH = 3

_KIND_CODES = {"garch": _GARCH, "garchm": _GARCHM, "tgarch": _TGARCH, "agarch": _AGARCH}


@njit(cache=True)
def _garch_loglik(y, kind, omega, alpha_a, alpha_b, b1, delta, s2w, h0, floor):
    n = y.shape[0]
    x0 = h0
    x1 = 0.0
    p00 = 1.0
    p01 = 0.0
    p11 = 1.0
    resid = y[0]
    hits = 0
    acc = 0.0
    for t in range(1, n):
        r2 = resid * resid
        if kind == _TGARCH:
            if resid > 0.0:
                arch = alpha_a * r2
            elif resid < 0.0:
                arch = alpha_b * r2
            else:
                arch = 0.0
        elif kind == _AGARCH:
            rp = resid if resid > 0.0 else 0.0
            arch = alpha_a * r2 + alpha_b * (rp * rp)
        else:
            arch = alpha_a * r2
        # time update: F = diag(b1, 1), B u adds omega + arch to the h row
        x0 = b1 * x0 + (omega + arch)
        p00 = b1 * p00 * b1
        p01 = b1 * p01
        p11 = p11 + s2w
        # measurement update with H = (delta-or-0, y[t-1]), R = floored h
        floored = x0 < floor
        if floored:
            hits += 1
        R = floor if floored else x0
        h0row = delta if kind == _GARCHM else 0.0
        h1row = y[t - 1]
        e = y[t] - (h0row * x0 + h1row * x1)
        ph0 = p00 * h0row + p01 * h1row
        ph1 = p01 * h0row + p11 * h1row
        re = h0row * ph0 + h1row * ph1 + R
        if not (re > 0.0) or not np.isfinite(re) or not np.isfinite(e):
            return 0.0, hits, t
        k0 = ph0 / re
        k1 = ph1 / re
        x0 = x0 + k0 * e
        x1 = x1 + k1 * e
        a00 = 1.0 - k0 * h0row
        a01 = -k0 * h1row
        a10 = -k1 * h0row
        a11 = 1.0 - k1 * h1row
        q00 = a00 * p00 + a01 * p01
        q01 = a00 * p01 + a01 * p11
        q10 = a10 * p00 + a11 * p01
        q11 = a10 * p01 + a11 * p11
        p00 = q00
        p01 = 0.5 * (q01 + q10)
        p11 = q11
        if not (np.isfinite(x0) and np.isfinite(x1) and np.isfinite(p00)
                and np.isfinite(p01) and np.isfinite(p11)):
            return 0.0, hits, t
        acc += np.log(re) + e * e / re
        resid = e
    t_eff = n - 1
    return -0.5 * t_eff * LOG_2PI - 0.5 * acc, hits, -1


@njit(cache=True)
def _tvar1_loglik(y, s2w, s2eps):
    n = y.shape[0]
    x = 0.0
    p = 1.0
    acc = 0.0
    for t in range(1, n):
        if t > 1:
            p = p + s2w
        h = y[t - 1]
        e = y[t] - h * x
        re = h * p * h + s2eps
        if not (re > 0.0) or not np.isfinite(re) or not np.isfinite(e):
            return 0.0, t
        k = p * h / re
        x = x + k * e
        p = (1.0 - k * h) * p
        if not (np.isfinite(x) and np.isfinite(p)):
            return 0.0, t
        acc += np.log(re) + e * e / re
    t_eff = n - 1
    return -0.5 * t_eff * LOG_2PI - 0.5 * acc, -1


def supports_fast_path(spec: ModelSpec) -> bool:
    return spec.kind in _KIND_CODES or (spec.kind == "tvar" and spec.ar_order == 1)


def fast_loglik(spec: ModelSpec, theta: Theta, y: np.ndarray,
                h0: float | None = None) -> tuple[float, int]:
    """Log-likelihood and floor-hit count under the default filter prior.

    `h0` overrides the variance-state prior (defaults to the sample variance
    of `y`). Raises FilterNumericalError exactly where the generic filter
    would, and ValueError for specs without a compiled loop.
    """
    y = np.ascontiguousarray(y, dtype=float)
    if spec.kind == "tvar":
        if spec.ar_order != 1:
            raise ValueError("fast path supports tvar with ar_order=1 only")
        assert isinstance(theta, TvarTheta)
        ll, fail = _tvar1_loglik(y, theta.sigma2_w[0], theta.sigma2_eps)
        if fail >= 0:
            raise FilterNumericalError(fail, "numerical breakdown in fast filter")
        return float(ll), 0
    if h0 is None:
        h0 = float(np.var(y, ddof=1))
    kind = _KIND_CODES[spec.kind]
    alpha_a, alpha_b, delta = 0.0, 0.0, 0.0
    if isinstance(theta, (GarchTheta, GarchMTheta)):
        alpha_a = theta.a1
        if isinstance(theta, GarchMTheta):
            delta = theta.delta
    elif isinstance(theta, TgarchTheta):
        alpha_a, alpha_b = theta.a1_plus, theta.a1_minus
    elif isinstance(theta, AgarchTheta):
        alpha_a, alpha_b = theta.a1, theta.a1_plus
    else:
        raise TypeError(f"unsupported theta {type(theta).__name__} for kind {spec.kind!r}")
    ll, hits, fail = _garch_loglik(
        y, kind, theta.omega, alpha_a, alpha_b, theta.b1, delta, theta.sigma2_w,
        h0, H_FLOOR,
    )
    if fail >= 0:
        raise FilterNumericalError(fail, "numerical breakdown in fast filter")
    return float(ll), int(hits)
